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
#include "fedmezo/federation/heterogeneity.hpp"
#include "fedmezo/objectives/objective.hpp"

namespace fedmezo {

// trace(H) / ||H||_op. Throws kUndefinedRank for a zero matrix.
double effective_rank(const DenseMatrix& h);

// Smallest integer >= the effective rank (tolerating 1e-9 of rounding).
std::size_t rank_for_rates(double effective);

// Exact Hessian when the objective has one; otherwise central differences
// of the gradient oracle (step h), symmetrised. Refuses d > 256.
DenseMatrix hessian_of(const Objective& obj, std::span<const double> params,
                       std::optional<Batch> batch = std::nullopt, double h = 1e-4);

struct CgSigmaOptions {
  ProbeOptions probes;
  std::size_t batch_size = 1;
  std::size_t batches_per_probe = 1000;  // Monte Carlo draws of E_B
  // With batch_size 1, average over every sample instead of drawing.
  bool exhaustive = false;
};

struct CgSigmaFit {
  double c_g = 1.0;
  double sigma_g_sq = 0.0;
  std::size_t probes = 0;
};

// Fit of E_B ||grad F(theta, B)||^2 = c_g ||grad f(theta)||^2 + sigma_g^2 over
// probe points, with c_g >= 1. Batches are drawn with replacement; a batch
// size >= the sample count uses the full table instead.
CgSigmaFit estimate_cg_sigma(const Objective& obj, const CgSigmaOptions& options);

// Local smoothness: |lambda_max| of the Hessian at `params` by power
// iteration on finite-difference Hessian-vector products.
double estimate_smoothness(const Objective& obj, std::span<const double> params,
                           std::size_t iters = 60, std::uint64_t seed = 0, double h = 1e-4);

}  // namespace fedmezo
