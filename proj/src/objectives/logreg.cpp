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

#include "fedmezo/objectives/logreg.hpp"

#include <algorithm>
#include <cmath>

#include "fedmezo/core/error.hpp"
#include "fedmezo/core/spectral.hpp"

namespace fedmezo {

namespace {

// log(1 + exp(t)) without overflow.
double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

LogRegObjective::LogRegObjective(std::shared_ptr<const Dataset> data, LogRegSpec spec)
    : data_(std::move(data)), spec_(spec) {
  if (!data_) throw Error(ErrorCode::kInvalidArgument, "logreg: null dataset");
  if (data_->num_classes() > 2) {
    throw Error(ErrorCode::kInvalidArgument, "logreg: labels must be 0 or 1");
  }
  if (!(spec_.l2 >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "logreg: l2 must be >= 0");
}

double LogRegObjective::loss(std::span<const double> params, const Batch& batch) const {
  double acc = 0.0;
  for (std::size_t s : batch.indices) {
    const double y = data_->labels()[s] == 1 ? 1.0 : -1.0;
    acc += softplus(-y * dot(params, data_->row(s)));
  }
  double out = acc / static_cast<double>(batch.indices.size());
  if (spec_.l2 > 0.0) out += 0.5 * spec_.l2 * squared_norm(params);
  return out;
}

DenseVector LogRegObjective::gradient(std::span<const double> params, const Batch& batch) const {
  DenseVector g(dim());
  const double inv = 1.0 / static_cast<double>(batch.indices.size());
  for (std::size_t s : batch.indices) {
    const double y = data_->labels()[s] == 1 ? 1.0 : -1.0;
    const auto x = data_->row(s);
    const double coef = -y * sigmoid(-y * dot(params, x)) * inv;
    g.axpy(coef, x);
  }
  if (spec_.l2 > 0.0) g.axpy(spec_.l2, params);
  return g;
}

double LogRegObjective::smoothness_bound() const {
  const std::size_t d = dim();
  const std::size_t n = data_->rows();
  DenseMatrix gram(d, d);
  for (std::size_t s = 0; s < n; ++s) {
    const auto x = data_->row(s);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) gram(i, j) += x[i] * x[j];
    }
  }
  const double top = power_iteration(gram, 200000, 1e-9).value;
  return top / (4.0 * static_cast<double>(n)) + spec_.l2;
}

}  // namespace fedmezo
