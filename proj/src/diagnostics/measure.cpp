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

#include "fedmezo/diagnostics/measure.hpp"

#include <algorithm>
#include <cmath>

#include "fedmezo/core/error.hpp"
#include "fedmezo/core/rng.hpp"
#include "fedmezo/core/spectral.hpp"

namespace fedmezo {

double effective_rank(const DenseMatrix& h) {
  if (!h.square() || !h.is_symmetric(1e-12 * std::max(1.0, std::abs(h.trace())))) {
    throw Error(ErrorCode::kInvalidArgument, "effective_rank needs a symmetric matrix");
  }
  const auto top = power_iteration(h, 1000000, 1e-12);
  const double opnorm = std::abs(top.value);
  if (!(opnorm > 0.0)) throw Error(ErrorCode::kUndefinedRank, "effective rank of a zero matrix");
  return h.trace() / opnorm;
}

std::size_t rank_for_rates(double effective) {
  return static_cast<std::size_t>(std::max(1.0, std::ceil(effective - 1e-9)));
}

DenseMatrix hessian_of(const Objective& obj, std::span<const double> params,
                       std::optional<Batch> batch, double h) {
  check_params(obj, params);
  const Batch b = batch ? *batch : obj.full_batch();
  check_batch(obj, b);
  if (auto exact = obj.exact_hessian(params, b)) return *exact;
  const std::size_t d = obj.dim();
  if (d > 256) {
    throw Error(ErrorCode::kDimensionTooLarge, "finite-difference Hessian refused for d > 256");
  }
  DenseVector probe = DenseVector::from(params);
  std::vector<double> cols(d * d);
  for (std::size_t j = 0; j < d; ++j) {
    const double saved = probe[j];
    probe[j] = saved + h;
    const DenseVector up = obj.gradient(probe, b);
    probe[j] = saved - h;
    const DenseVector down = obj.gradient(probe, b);
    probe[j] = saved;
    for (std::size_t i = 0; i < d; ++i) cols[i * d + j] = (up[i] - down[i]) / (2.0 * h);
  }
  DenseMatrix out(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) out(i, j) = 0.5 * (cols[i * d + j] + cols[j * d + i]);
  }
  return out;
}

CgSigmaFit estimate_cg_sigma(const Objective& obj, const CgSigmaOptions& options) {
  if (options.probes.probes < 20) throw Error(ErrorCode::kInvalidArgument, "need >= 20 probes");
  if (options.batch_size == 0 || options.batches_per_probe == 0) {
    throw Error(ErrorCode::kInvalidArgument, "batch size and batch draws must be >= 1");
  }
  const Batch full = obj.full_batch();
  const bool use_full = options.batch_size >= obj.sample_count();
  std::vector<double> xs;
  std::vector<double> ys;
  const auto points = probe_points(obj.dim(), options.probes);
  Batch batch;
  batch.indices.resize(options.batch_size);
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto& theta = points[p];
    xs.push_back(obj.gradient(theta, full).squared_norm());
    if (use_full) {
      ys.push_back(xs.back());
      continue;
    }
    double acc = 0.0;
    if (options.exhaustive && options.batch_size == 1) {
      for (std::size_t s = 0; s < obj.sample_count(); ++s) {
        batch.indices[0] = s;
        acc += obj.gradient(theta, batch).squared_norm();
      }
      ys.push_back(acc / static_cast<double>(obj.sample_count()));
      continue;
    }
    SeedStream stream(derive_seed(RngRecipe{options.probes.seed, 1, p, 0xc9}));
    for (std::size_t m = 0; m < options.batches_per_probe; ++m) {
      for (auto& idx : batch.indices) idx = stream.next_below(obj.sample_count());
      acc += obj.gradient(theta, batch).squared_norm();
    }
    ys.push_back(acc / static_cast<double>(options.batches_per_probe));
  }
  const LineFit fit = clamped_line_fit(xs, ys, 1.0);
  CgSigmaFit out;
  out.c_g = fit.slope;
  out.sigma_g_sq = std::max(fit.intercept, 0.0);
  out.probes = points.size();
  return out;
}

double estimate_smoothness(const Objective& obj, std::span<const double> params, std::size_t iters,
                           std::uint64_t seed, double h) {
  check_params(obj, params);
  const Batch full = obj.full_batch();
  if (auto exact = obj.exact_hessian(params, full)) {
    return std::abs(power_iteration(*exact, 1000000, 1e-10).value);
  }
  SeedStream stream(salted_seed(seed, 0x5300));
  DenseVector v = sample_gaussian(stream, obj.dim());
  v *= 1.0 / v.norm();
  DenseVector probe = DenseVector::from(params);
  double lambda = 0.0;
  for (std::size_t it = 0; it < std::max<std::size_t>(iters, 1); ++it) {
    for (std::size_t j = 0; j < probe.size(); ++j) probe[j] = params[j] + h * v[j];
    DenseVector hv = obj.gradient(probe, full);
    for (std::size_t j = 0; j < probe.size(); ++j) probe[j] = params[j] - h * v[j];
    hv -= obj.gradient(probe, full);
    hv *= 1.0 / (2.0 * h);
    const double nrm = hv.norm();
    if (!(nrm > 0.0)) return 0.0;
    lambda = nrm;
    v = std::move(hv);
    v *= 1.0 / nrm;
  }
  return lambda;
}

}  // namespace fedmezo
