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

#include "fedmezo/zoo/zoo.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "fedmezo/core/error.hpp"
#include "fedmezo/core/rng.hpp"

namespace fedmezo {

void validate(const ZooConfig& cfg) {
  if (!(cfg.mu > 0.0) || !std::isfinite(cfg.mu)) {
    throw Error(ErrorCode::kInvalidArgument, "mu must be > 0");
  }
  if (cfg.n == 0) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
}

std::uint64_t perturbation_seed(std::uint64_t seed, std::size_t j) noexcept {
  if (j == 0) return seed;
  return mix64(seed ^ mix64(0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(j)));
}

void perturb(std::span<double> params, std::uint64_t seed, double scale) noexcept {
  GaussianStream z(seed);
  for (double& p : params) p += scale * z.next();
}

namespace {

void perturb_with(std::span<double> params, std::optional<std::span<const double>> forced,
                  std::uint64_t seed, double scale) {
  if (forced) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] += scale * (*forced)[i];
  } else {
    perturb(params, seed, scale);
  }
}

void check_inputs(const Objective& obj, std::span<const double> params, const Batch& batch,
                  const ZooConfig& cfg, std::optional<std::span<const double>> forced) {
  validate(cfg);
  check_params(obj, params);
  check_batch(obj, batch);
  if (forced) {
    if (forced->size() != params.size()) {
      throw Error(ErrorCode::kInvalidArgument, "forced direction has wrong length");
    }
    if (cfg.n != 1) throw Error(ErrorCode::kInvalidArgument, "forced direction requires n = 1");
  }
}

[[noreturn]] void overflow(std::span<const double> at, const char* what) {
  throw NumericalOverflowError(std::string("non-finite loss during ") + what, norm(at));
}

// Shared body of both estimators. `two_sided` picks the minus evaluation.
Estimate estimate(const Objective& obj, std::span<const double> params, const Batch& batch,
                  const ZooConfig& cfg, std::uint64_t seed,
                  std::optional<std::span<const double>> forced, bool two_sided) {
  check_inputs(obj, params, batch, cfg, forced);
  const std::size_t d = params.size();
  DenseVector work = DenseVector::from(params);
  Estimate out;
  out.e = DenseVector(d);
  double base = 0.0;
  if (!two_sided) {
    base = obj.loss(params, batch);
    if (!std::isfinite(base)) overflow(params, "base evaluation");
  }
  for (std::size_t j = 0; j < cfg.n; ++j) {
    const std::uint64_t sj = perturbation_seed(seed, j);
    std::copy(params.begin(), params.end(), work.begin());
    perturb_with(work.span(), forced, sj, cfg.mu);
    const double lp = obj.loss(work, batch);
    if (!std::isfinite(lp)) overflow(work, "perturbed evaluation");
    double lm = base;
    if (two_sided) {
      std::copy(params.begin(), params.end(), work.begin());
      perturb_with(work.span(), forced, sj, -cfg.mu);
      lm = obj.loss(work, batch);
      if (!std::isfinite(lm)) overflow(work, "perturbed evaluation");
    }
    const double g = (lp - lm) / (2.0 * cfg.mu);
    out.g += g;
    out.loss_plus += lp;
    out.loss_minus += lm;
    if (forced) {
      out.e.axpy(g, *forced);
    } else {
      GaussianStream z(sj);
      for (std::size_t i = 0; i < d; ++i) out.e[i] += g * z.next();
    }
  }
  const double inv = 1.0 / static_cast<double>(cfg.n);
  out.g *= inv;
  out.loss_plus *= inv;
  out.loss_minus *= inv;
  out.e *= inv;
  return out;
}

}  // namespace

Estimate two_point_estimate(const Objective& obj, std::span<const double> params,
                            const Batch& batch, const ZooConfig& cfg, std::uint64_t seed,
                            std::optional<std::span<const double>> forced_z) {
  return estimate(obj, params, batch, cfg, seed, forced_z, true);
}

Estimate one_point_estimate(const Objective& obj, std::span<const double> params,
                            const Batch& batch, const ZooConfig& cfg, std::uint64_t seed,
                            std::optional<std::span<const double>> forced_z) {
  return estimate(obj, params, batch, cfg, seed, forced_z, false);
}

StepOutcome mezo_step_inplace(const Objective& obj, std::span<double> params, const Batch& batch,
                              const ZooConfig& cfg, double eta, std::uint64_t seed,
                              RestoreMode mode, std::optional<std::span<const double>> forced_z) {
  check_inputs(obj, params, batch, cfg, forced_z);
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw Error(ErrorCode::kInvalidArgument, "learning rate must be finite and >= 0");
  }
  const double mu = cfg.mu;
  DenseVector snapshot;
  if (mode == RestoreMode::kSnapshot) snapshot = DenseVector::from(params);

  std::vector<double> gs(cfg.n);
  StepOutcome out;
  out.seed = seed;
  out.eta = eta;
  for (std::size_t j = 0; j < cfg.n; ++j) {
    const std::uint64_t sj = perturbation_seed(seed, j);
    perturb_with(params, forced_z, sj, mu);
    const double lp = obj.loss(params, batch);
    double lm = lp;
    const bool plus_ok = std::isfinite(lp);
    if (plus_ok) {
      perturb_with(params, forced_z, sj, -2.0 * mu);
      lm = obj.loss(params, batch);
    }
    if (!plus_ok || !std::isfinite(lm)) {
      const double bad_norm = norm(params);
      if (mode == RestoreMode::kSnapshot) {
        std::copy(snapshot.begin(), snapshot.end(), params.begin());
      } else {
        perturb_with(params, forced_z, sj, plus_ok ? mu : -mu);
      }
      throw NumericalOverflowError("non-finite loss in mezo step", bad_norm);
    }
    if (mode == RestoreMode::kSnapshot) {
      std::copy(snapshot.begin(), snapshot.end(), params.begin());
    } else {
      perturb_with(params, forced_z, sj, mu);
    }
    gs[j] = (lp - lm) / (2.0 * mu);
    out.loss_plus += lp;
    out.loss_minus += lm;
  }
  const double inv = 1.0 / static_cast<double>(cfg.n);
  for (std::size_t j = 0; j < cfg.n; ++j) {
    out.g += gs[j] * inv;
    if (eta != 0.0) perturb_with(params, forced_z, perturbation_seed(seed, j), -eta * gs[j] * inv);
  }
  out.loss_plus *= inv;
  out.loss_minus *= inv;
  if (!std::isfinite(out.g)) throw NumericalOverflowError("non-finite projected gradient", norm(params));
  return out;
}

SecondMoment estimator_second_moment(const Objective& obj, std::span<const double> params,
                                     const Batch& batch, const ZooConfig& cfg,
                                     std::size_t n_samples, std::uint64_t seed) {
  validate(cfg);
  check_params(obj, params);
  check_batch(obj, batch);
  if (n_samples < 1000) throw Error(ErrorCode::kInvalidArgument, "second moment needs >= 1000 samples");
  const std::size_t d = params.size();
  DenseVector work = DenseVector::from(params);
  double acc = 0.0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    const std::uint64_t sk = derive_seed(RngRecipe{seed, 0, 0, k});
    if (cfg.n == 1) {
      double zz = 0.0;
      {
        GaussianStream z(sk);
        for (std::size_t i = 0; i < d; ++i) {
          const double zi = z.next();
          zz += zi * zi;
          work[i] = params[i] + cfg.mu * zi;
        }
      }
      const double lp = obj.loss(work, batch);
      perturb(work.span(), sk, -2.0 * cfg.mu);
      const double lm = obj.loss(work, batch);
      const double g = (lp - lm) / (2.0 * cfg.mu);
      acc += g * g * zz;
    } else {
      acc += two_point_estimate(obj, params, batch, cfg, sk).e.squared_norm();
    }
  }
  SecondMoment out;
  out.samples = n_samples;
  out.value = acc / static_cast<double>(n_samples);
  out.grad_sq_norm = obj.gradient(params, batch).squared_norm();
  out.measured_ratio = out.grad_sq_norm > 0.0 ? out.value / out.grad_sq_norm : 0.0;
  out.gaussian_ratio = static_cast<double>(d) + 2.0;
  out.stated_ratio = static_cast<double>(d + cfg.n - 1) / static_cast<double>(cfg.n);
  return out;
}

}  // namespace fedmezo
