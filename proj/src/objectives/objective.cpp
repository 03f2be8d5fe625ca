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

#include "fedmezo/objectives/objective.hpp"

#include <numeric>
#include <string>

#include "fedmezo/core/error.hpp"

namespace fedmezo {

const char* to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kQuadratic: return "quadratic";
    case ObjectiveKind::kLogReg: return "logreg";
    case ObjectiveKind::kMlpLora: return "mlp-lora";
    case ObjectiveKind::kMean: return "mean";
  }
  return "unknown";
}

Batch Objective::full_batch() const {
  Batch b;
  b.indices.resize(sample_count());
  std::iota(b.indices.begin(), b.indices.end(), std::size_t{0});
  return b;
}

void check_params(const Objective& obj, std::span<const double> params) {
  if (params.size() != obj.dim()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(to_string(obj.kind())) + ": expected " + std::to_string(obj.dim()) +
                    " parameters, got " + std::to_string(params.size()));
  }
}

void check_batch(const Objective& obj, const Batch& batch) {
  if (batch.indices.empty()) throw Error(ErrorCode::kInvalidArgument, "batch must be non-empty");
  for (std::size_t idx : batch.indices) {
    if (idx >= obj.sample_count()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "batch index " + std::to_string(idx) + " out of range");
    }
  }
}

double eval_loss(const Objective& obj, std::span<const double> params, const Batch& batch) {
  check_params(obj, params);
  check_batch(obj, batch);
  return obj.loss(params, batch);
}

DenseVector true_grad(const Objective& obj, std::span<const double> params, const Batch& batch) {
  check_params(obj, params);
  check_batch(obj, batch);
  return obj.gradient(params, batch);
}

DenseVector finite_difference_grad(const Objective& obj, std::span<const double> params,
                                   const Batch& batch, double h) {
  check_params(obj, params);
  check_batch(obj, batch);
  DenseVector probe = DenseVector::from(params);
  DenseVector grad(params.size());
  for (std::size_t j = 0; j < params.size(); ++j) {
    const double saved = probe[j];
    probe[j] = saved + h;
    const double up = obj.loss(probe, batch);
    probe[j] = saved - h;
    const double down = obj.loss(probe, batch);
    probe[j] = saved;
    grad[j] = (up - down) / (2.0 * h);
  }
  return grad;
}

MeanObjective::MeanObjective(std::vector<ObjectiveHandle> members) : members_(std::move(members)) {
  if (members_.empty()) throw Error(ErrorCode::kInvalidArgument, "mean objective needs members");
  dim_ = members_.front()->dim();
  for (const auto& m : members_) {
    if (m->dim() != dim_) throw Error(ErrorCode::kInvalidDimension, "mean objective: dim mismatch");
    full_batches_.push_back(m->full_batch());
  }
}

double MeanObjective::loss(std::span<const double> params, const Batch&) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < members_.size(); ++i) acc += members_[i]->loss(params, full_batches_[i]);
  return acc / static_cast<double>(members_.size());
}

DenseVector MeanObjective::gradient(std::span<const double> params, const Batch&) const {
  DenseVector acc(dim_);
  for (std::size_t i = 0; i < members_.size(); ++i) {
    acc += members_[i]->gradient(params, full_batches_[i]);
  }
  acc *= 1.0 / static_cast<double>(members_.size());
  return acc;
}

std::optional<DenseMatrix> MeanObjective::exact_hessian(std::span<const double> params,
                                                        const Batch&) const {
  std::vector<double> acc(dim_ * dim_, 0.0);
  for (std::size_t i = 0; i < members_.size(); ++i) {
    auto h = members_[i]->exact_hessian(params, full_batches_[i]);
    if (!h) return std::nullopt;
    const auto vals = h->values();
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += vals[k];
  }
  for (double& v : acc) v /= static_cast<double>(members_.size());
  return DenseMatrix(dim_, dim_, std::move(acc));
}

}  // namespace fedmezo
