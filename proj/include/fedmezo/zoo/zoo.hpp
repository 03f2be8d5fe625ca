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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "fedmezo/core/dense.hpp"
#include "fedmezo/objectives/objective.hpp"

namespace fedmezo {

struct ZooConfig {
  double mu = 1e-3;
  std::size_t n = 1;  // perturbations averaged per estimate
};

void validate(const ZooConfig& cfg);

// Seed of the j-th perturbation in a multi-perturbation estimate; j = 0 is
// the seed itself so n = 1 needs no extra mixing.
std::uint64_t perturbation_seed(std::uint64_t seed, std::size_t j) noexcept;

// params += scale * z(seed), regenerating z coordinate by coordinate.
void perturb(std::span<double> params, std::uint64_t seed, double scale) noexcept;

struct Estimate {
  double g = 0.0;      // projected gradient (mean over the n directions)
  DenseVector e;       // the estimate vector
  double loss_plus = 0.0;
  double loss_minus = 0.0;  // F(theta - mu z); for the one-point form, F(theta)
};

// e = z (F(theta + mu z) - F(theta - mu z)) / (2 mu). `forced_z` replaces the
// seeded direction (n must be 1 then).
Estimate two_point_estimate(const Objective& obj, std::span<const double> params,
                            const Batch& batch, const ZooConfig& cfg, std::uint64_t seed,
                            std::optional<std::span<const double>> forced_z = std::nullopt);

// e = z (F(theta + mu z) - F(theta)) / (2 mu).
Estimate one_point_estimate(const Objective& obj, std::span<const double> params,
                            const Batch& batch, const ZooConfig& cfg, std::uint64_t seed,
                            std::optional<std::span<const double>> forced_z = std::nullopt);

enum class RestoreMode { kInPlace, kSnapshot };

struct StepOutcome {
  double g = 0.0;
  double loss_plus = 0.0;
  double loss_minus = 0.0;
  std::uint64_t seed = 0;
  double eta = 0.0;
};

// One MeZO step by seed replay:
//   theta += mu z; l+ = F
//   theta -= 2 mu z; l- = F
//   theta += mu z          (kSnapshot: copy back instead)
//   theta -= eta g z
// kInPlace never allocates a parameter-length buffer. On a non-finite loss
// the parameters are restored and NumericalOverflowError is thrown.
StepOutcome mezo_step_inplace(const Objective& obj, std::span<double> params, const Batch& batch,
                              const ZooConfig& cfg, double eta, std::uint64_t seed,
                              RestoreMode mode = RestoreMode::kInPlace,
                              std::optional<std::span<const double>> forced_z = std::nullopt);

struct SecondMoment {
  double value = 0.0;          // Monte Carlo E||e||^2
  double grad_sq_norm = 0.0;   // ||grad F||^2 from the oracle
  double measured_ratio = 0.0; // value / grad_sq_norm
  double gaussian_ratio = 0.0; // d + 2
  double stated_ratio = 0.0;   // (d + n - 1) / n, the reciprocal of the n/(d+n-1) factor
  std::size_t samples = 0;
};

// Directions k = 0..n_samples-1 use derive_seed({seed, 0, 0, k}).
SecondMoment estimator_second_moment(const Objective& obj, std::span<const double> params,
                                     const Batch& batch, const ZooConfig& cfg,
                                     std::size_t n_samples, std::uint64_t seed);

}  // namespace fedmezo
