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
#include <vector>

#include "fedmezo/core/dense.hpp"
#include "fedmezo/objectives/objective.hpp"

namespace fedmezo {

// One row of a quadratic's sample table:
//   F_s(theta) = c + w/2 * r^T P A P r,   r = theta - theta* - shift,
// where P keeps only `coords` (all coordinates when empty).
struct QuadraticSample {
  std::vector<std::size_t> coords;
  double weight = 1.0;
  std::optional<DenseVector> shift;
};

struct QuadraticSpec {
  DenseMatrix curvature;
  DenseVector optimum;
  double offset = 0.0;
  // Empty: a single exact sample, f* = offset at the optimum.
  std::vector<QuadraticSample> samples;
};

class QuadraticObjective final : public Objective {
 public:
  explicit QuadraticObjective(QuadraticSpec spec);

  ObjectiveKind kind() const noexcept override { return ObjectiveKind::kQuadratic; }
  std::size_t dim() const noexcept override { return spec_.optimum.size(); }
  std::size_t sample_count() const noexcept override {
    return spec_.samples.empty() ? 1 : spec_.samples.size();
  }
  double loss(std::span<const double> params, const Batch& batch) const override;
  DenseVector gradient(std::span<const double> params, const Batch& batch) const override;
  std::optional<DenseMatrix> exact_hessian(std::span<const double> params,
                                           const Batch& batch) const override;

  const QuadraticSpec& spec() const noexcept { return spec_; }
  // Curvature, minimizer and minimum of the full-table mean.
  const DenseMatrix& global_curvature() const noexcept { return global_curvature_; }
  const DenseVector& global_optimum() const noexcept { return global_optimum_; }
  double min_value() const noexcept { return min_value_; }
  // L = lambda_max of the full-table curvature.
  double smoothness() const noexcept { return smoothness_; }

 private:
  double sample_loss(std::span<const double> params, std::size_t s) const;
  void add_sample_gradient(std::span<const double> params, std::size_t s, double scale,
                           std::span<double> out) const;
  DenseMatrix batch_curvature(const Batch& batch) const;

  QuadraticSpec spec_;
  DenseMatrix global_curvature_;
  DenseVector global_optimum_;
  double min_value_ = 0.0;
  double smoothness_ = 0.0;
};

struct Heterogeneity {
  double shift_scale = 0.0;
  double curvature_spread = 0.0;
};

// Client i gets optimum theta* + shift_i (shift_i ~ N(0, shift_scale^2 I))
// and curvature A * (1 + spread_i) (spread_i ~ U[-spread, spread]).
std::vector<QuadraticSpec> make_client_quadratics(std::size_t n_clients, const QuadraticSpec& base,
                                                  const Heterogeneity& het, std::uint64_t seed);
// Same with base A = I and theta* ~ N(0, I).
std::vector<QuadraticSpec> make_client_quadratics(std::size_t n_clients, std::size_t d,
                                                  const Heterogeneity& het, std::uint64_t seed);

// Diagonal quadratic whose samples each touch one block of `block_size`
// coordinates, weighted d / block_size. The blocks of each repeat are a random
// partition of the coordinates, so the table mean equals the dense quadratic
// exactly while a single sample's gradient has c_g = d / block_size.
QuadraticSpec make_sparse_block_quadratic(std::span<const double> spectrum,
                                          const DenseVector& optimum, std::size_t block_size,
                                          std::size_t repeats, std::uint64_t seed);

// Every sample sees all coordinates with shift u_s ~ N(0, target_scale^2 I):
// c_g = 1 and sigma_g^2 = mean ||A (u_s - u_bar)||^2.
QuadraticSpec make_target_noise_quadratic(const DenseMatrix& curvature, const DenseVector& optimum,
                                          std::size_t samples, double target_scale,
                                          std::uint64_t seed);

std::vector<double> linspace(double lo, double hi, std::size_t n);

}  // namespace fedmezo
