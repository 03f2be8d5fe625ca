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

#include "fedmezo/core/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fedmezo/core/error.hpp"
#include "fedmezo/core/rng.hpp"

namespace fedmezo {

EigenPair power_iteration(const DenseMatrix& m, std::size_t max_iters, double tol) {
  if (!m.square()) throw Error(ErrorCode::kInvalidDimension, "power_iteration: non-square matrix");
  if (!m.is_symmetric(1e-12 * std::max(1.0, std::abs(m.trace())))) {
    throw Error(ErrorCode::kInvalidArgument, "power_iteration: matrix is not symmetric");
  }
  const std::size_t n = m.rows();

  // Fixed pseudo-random start: never exactly orthogonal to the top eigenvector
  // in practice, and the result stays reproducible.
  SeedStream stream(0x5eed5eedULL);
  DenseVector v = sample_gaussian(stream, n);
  v *= 1.0 / v.norm();
  DenseVector w(n);

  double lambda = 0.0;
  double residual = 0.0;
  for (std::size_t it = 1; it <= max_iters; ++it) {
    m.multiply_into(v.span(), w.span());
    lambda = dot(v, w) / dot(v, v);  // Rayleigh quotient; v is only unit to rounding
    residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = w[i] - lambda * v[i];
      residual += r * r;
    }
    residual = std::sqrt(residual);
    if (residual <= tol * std::abs(lambda)) {
      return EigenPair{lambda, std::move(v), it, residual};
    }
    const double w_norm = w.norm();
    if (w_norm == 0.0) {
      // v lies in the null space; the zero matrix is the only way to get here
      // from a generic start, and its dominant eigenvalue is 0.
      return EigenPair{0.0, std::move(v), it, 0.0};
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / w_norm;
  }
  throw NonConvergenceError("power_iteration did not converge after " +
                                std::to_string(max_iters) + " iterations (residual " +
                                std::to_string(residual) + ")",
                            residual);
}

DenseVector solve_spd(const DenseMatrix& m, std::span<const double> b) {
  if (!m.square() || m.rows() != b.size()) {
    throw Error(ErrorCode::kInvalidDimension, "solve_spd: shape mismatch");
  }
  const std::size_t n = m.rows();
  std::vector<double> l(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = m(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l[j * n + k] * l[j * n + k];
    if (!(diag > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "solve_spd: matrix is not positive definite");
    }
    const double ljj = std::sqrt(diag);
    l[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double acc = m(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = acc / ljj;
    }
  }
  DenseVector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = b[i];
    for (std::size_t k = 0; k < i; ++k) acc -= l[i * n + k] * y[k];
    y[i] = acc / l[i * n + i];
  }
  DenseVector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) acc -= l[k * n + ii] * x[k];
    x[ii] = acc / l[ii * n + ii];
  }
  return x;
}

}  // namespace fedmezo
