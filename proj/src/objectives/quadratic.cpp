// Copyright 2026 The FedMeZO Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fedmezo/objectives/quadratic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedmezo/core/error.hpp"
#include "fedmezo/core/rng.hpp"
#include "fedmezo/core/spectral.hpp"

namespace fedmezo {

QuadraticObjective::QuadraticObjective(QuadraticSpec spec) : spec_(std::move(spec)) {
  const std::size_t d = spec_.optimum.size();
  if (d == 0) throw Error(ErrorCode::kInvalidDimension, "quadratic: empty optimum");
  if (spec_.curvature.rows() != d || spec_.curvature.cols() != d) {
    throw Error(ErrorCode::kInvalidDimension, "quadratic: curvature must be d x d");
  }
  if (!spec_.curvature.verify_symmetric_psd(1e-10)) {
    throw Error(ErrorCode::kInvalidArgument, "quadratic: curvature must be symmetric PSD");
  }
  bool any_shift = false;
  for (std::size_t s = 0; s < spec_.samples.size(); ++s) {
    auto& sample = spec_.samples[s];
    if (!(sample.weight >= 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "quadratic: sample weights must be >= 0");
    }
    for (std::size_t c : sample.coords) {
      if (c >= d) throw Error(ErrorCode::kInvalidArgument, "quadratic: sample coordinate out of range");
    }
    std::sort(sample.coords.begin(), sample.coords.end());
    if (sample.shift) {
      if (sample.shift->size() != d) {
        throw Error(ErrorCode::kInvalidDimension, "quadratic: sample shift must have length d");
      }
      any_shift = true;
    }
  }

  if (spec_.samples.empty()) {
    global_curvature_ = spec_.curvature;
    global_optimum_ = spec_.optimum;
  } else {
    global_curvature_ = batch_curvature(full_batch());
    if (!any_shift) {
      global_optimum_ = spec_.optimum;
    } else {
      // grad f = A_bar theta - mean_s w_s P A P (theta* + u_s)
      DenseVector rhs(d);
      DenseVector target(d);
      for (std::size_t s = 0; s < spec_.samples.size(); ++s) {
        const auto& sample = spec_.samples[s];
        for (std::size_t j = 0; j < d; ++j) {
          target[j] = spec_.optimum[j] + (sample.shift ? (*sample.shift)[j] : 0.0);
        }
        if (sample.coords.empty()) {
          for (std::size_t a = 0; a < d; ++a) {
            double acc = 0.0;
            for (std::size_t b = 0; b < d; ++b) acc += spec_.curvature(a, b) * target[b];
            rhs[a] += sample.weight * acc;
          }
        } else {
          for (std::size_t a : sample.coords) {
            double acc = 0.0;
            for (std::size_t b : sample.coords) acc += spec_.curvature(a, b) * target[b];
            rhs[a] += sample.weight * acc;
          }
        }
      }
      rhs *= 1.0 / static_cast<double>(spec_.samples.size());
      global_optimum_ = solve_spd(global_curvature_, rhs);
    }
  }
  min_value_ = loss(global_optimum_, full_batch());
  smoothness_ = power_iteration(global_curvature_, 200000, 1e-12).value;
}

double QuadraticObjective::sample_loss(std::span<const double> params, std::size_t s) const {
  const auto& a = spec_.curvature;
  const auto& opt = spec_.optimum;
  if (spec_.samples.empty()) {
    const std::size_t d = opt.size();
    double form = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double ri = params[i] - opt[i];
      const auto row = a.row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += row[j] * (params[j] - opt[j]);
      form += ri * acc;
    }
    return spec_.offset + 0.5 * form;
  }
  const auto& sample = spec_.samples[s];
  const double* shift = sample.shift ? sample.shift->data() : nullptr;
  auto resid = [&](std::size_t j) { return params[j] - opt[j] - (shift ? shift[j] : 0.0); };
  double form = 0.0;
  if (sample.coords.empty()) {
    const std::size_t d = opt.size();
    for (std::size_t i = 0; i < d; ++i) {
      const auto row = a.row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += row[j] * resid(j);
      form += resid(i) * acc;
    }
  } else {
    for (std::size_t i : sample.coords) {
      double acc = 0.0;
      for (std::size_t j : sample.coords) acc += a(i, j) * resid(j);
      form += resid(i) * acc;
    }
  }
  return spec_.offset + 0.5 * sample.weight * form;
}

void QuadraticObjective::add_sample_gradient(std::span<const double> params, std::size_t s,
                                             double scale, std::span<double> out) const {
  const auto& a = spec_.curvature;
  const auto& opt = spec_.optimum;
  const std::size_t d = opt.size();
  const QuadraticSample* sample = spec_.samples.empty() ? nullptr : &spec_.samples[s];
  const double* shift = (sample && sample->shift) ? sample->shift->data() : nullptr;
  const double w = sample ? sample->weight : 1.0;
  auto resid = [&](std::size_t j) { return params[j] - opt[j] - (shift ? shift[j] : 0.0); };
  if (!sample || sample->coords.empty()) {
    for (std::size_t i = 0; i < d; ++i) {
      const auto row = a.row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += row[j] * resid(j);
      out[i] += scale * w * acc;
    }
  } else {
    for (std::size_t i : sample->coords) {
      double acc = 0.0;
      for (std::size_t j : sample->coords) acc += a(i, j) * resid(j);
      out[i] += scale * w * acc;
    }
  }
}

double QuadraticObjective::loss(std::span<const double> params, const Batch& batch) const {
  double acc = 0.0;
  for (std::size_t s : batch.indices) acc += sample_loss(params, s);
  return acc / static_cast<double>(batch.indices.size());
}

DenseVector QuadraticObjective::gradient(std::span<const double> params, const Batch& batch) const {
  DenseVector g(dim());
  const double scale = 1.0 / static_cast<double>(batch.indices.size());
  for (std::size_t s : batch.indices) add_sample_gradient(params, s, scale, g.span());
  return g;
}

DenseMatrix QuadraticObjective::batch_curvature(const Batch& batch) const {
  const std::size_t d = dim();
  if (spec_.samples.empty()) return spec_.curvature;
  std::vector<double> acc(d * d, 0.0);
  for (std::size_t s : batch.indices) {
    const auto& sample = spec_.samples[s];
    if (sample.coords.empty()) {
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) acc[i * d + j] += sample.weight * spec_.curvature(i, j);
      }
    } else {
      for (std::size_t i : sample.coords) {
        for (std::size_t j : sample.coords) acc[i * d + j] += sample.weight * spec_.curvature(i, j);
      }
    }
  }
  for (double& v : acc) v /= static_cast<double>(batch.indices.size());
  return DenseMatrix(d, d, std::move(acc));
}

std::optional<DenseMatrix> QuadraticObjective::exact_hessian(std::span<const double>,
                                                             const Batch& batch) const {
  return batch_curvature(batch);
}

namespace {

QuadraticSpec perturbed_copy(const QuadraticSpec& base, SeedStream& stream, const Heterogeneity& het) {
  QuadraticSpec out = base;
  const std::size_t d = base.optimum.size();
  for (std::size_t j = 0; j < d; ++j) {
    out.optimum[j] += het.shift_scale * box_muller(stream).first;
  }
  const double spread = het.curvature_spread * (2.0 * stream.next_uniform() - 1.0);
  if (1.0 + spread < 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "curvature spread produces a non-PSD client curvature (1 + spread < 0)");
  }
  out.curvature = base.curvature.scaled(1.0 + spread);
  return out;
}

}  // namespace

std::vector<QuadraticSpec> make_client_quadratics(std::size_t n_clients, const QuadraticSpec& base,
                                                  const Heterogeneity& het, std::uint64_t seed) {
  if (n_clients == 0) throw Error(ErrorCode::kInvalidArgument, "need at least one client");
  if (het.shift_scale < 0.0) throw Error(ErrorCode::kInvalidArgument, "shift_scale must be >= 0");
  if (het.curvature_spread > 1.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "curvature_spread > 1 can produce a non-PSD client curvature");
  }
  std::vector<QuadraticSpec> out;
  out.reserve(n_clients);
  for (std::size_t i = 0; i < n_clients; ++i) {
    SeedStream stream(derive_seed(RngRecipe{seed, 0, i, 0}));
    out.push_back(perturbed_copy(base, stream, het));
  }
  return out;
}

std::vector<QuadraticSpec> make_client_quadratics(std::size_t n_clients, std::size_t d,
                                                  const Heterogeneity& het, std::uint64_t seed) {
  if (d == 0) throw Error(ErrorCode::kInvalidArgument, "d must be >= 1");
  SeedStream stream(salted_seed(seed, 0xba5e));
  QuadraticSpec base{DenseMatrix::identity(d), sample_gaussian(stream, d), 0.0, {}};
  return make_client_quadratics(n_clients, base, het, seed);
}

QuadraticSpec make_sparse_block_quadratic(std::span<const double> spectrum,
                                          const DenseVector& optimum, std::size_t block_size,
                                          std::size_t repeats, std::uint64_t seed) {
  const std::size_t d = spectrum.size();
  if (d == 0 || optimum.size() != d) {
    throw Error(ErrorCode::kInvalidDimension, "sparse quadratic: spectrum/optimum length mismatch");
  }
  if (block_size == 0 || d % block_size != 0) {
    throw Error(ErrorCode::kInvalidArgument, "sparse quadratic: block_size must divide d");
  }
  if (repeats == 0) throw Error(ErrorCode::kInvalidArgument, "sparse quadratic: repeats must be >= 1");
  QuadraticSpec spec{DenseMatrix::diagonal(spectrum), optimum, 0.0, {}};
  const double weight = static_cast<double>(d) / static_cast<double>(block_size);
  SeedStream stream(salted_seed(seed, 0xb10c));
  std::vector<std::size_t> perm(d);
  for (std::size_t rep = 0; rep < repeats; ++rep) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = d; i > 1; --i) std::swap(perm[i - 1], perm[stream.next_below(i)]);
    for (std::size_t b = 0; b < d / block_size; ++b) {
      QuadraticSample sample;
      sample.coords.assign(perm.begin() + static_cast<std::ptrdiff_t>(b * block_size),
                           perm.begin() + static_cast<std::ptrdiff_t>((b + 1) * block_size));
      sample.weight = weight;
      spec.samples.push_back(std::move(sample));
    }
  }
  return spec;
}

QuadraticSpec make_target_noise_quadratic(const DenseMatrix& curvature, const DenseVector& optimum,
                                          std::size_t samples, double target_scale,
                                          std::uint64_t seed) {
  if (samples == 0) throw Error(ErrorCode::kInvalidArgument, "need at least one sample");
  QuadraticSpec spec{curvature, optimum, 0.0, {}};
  SeedStream stream(salted_seed(seed, 0x7a49));
  for (std::size_t s = 0; s < samples; ++s) {
    QuadraticSample sample;
    DenseVector shift = sample_gaussian(stream, optimum.size());
    shift *= target_scale;
    sample.shift = std::move(shift);
    spec.samples.push_back(std::move(sample));
  }
  return spec;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

}  // namespace fedmezo
