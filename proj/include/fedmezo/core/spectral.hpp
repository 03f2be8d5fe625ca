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
#include <span>

#include "fedmezo/core/dense.hpp"

namespace fedmezo {

struct EigenPair {
  double value = 0.0;  // Rayleigh quotient, signed
  DenseVector vector;  // unit norm
  std::size_t iterations = 0;
  double residual = 0.0;  // ||M v - value v||
};

// Dominant eigenpair of a symmetric matrix. On exit
// ||M v - lambda v|| <= tol * |lambda|; otherwise NonConvergenceError with
// the last residual.
EigenPair power_iteration(const DenseMatrix& m, std::size_t max_iters = 100000,
                          double tol = 1e-10);

// Solves M x = b for symmetric positive definite M (Cholesky).
DenseVector solve_spd(const DenseMatrix& m, std::span<const double> b);

}  // namespace fedmezo
