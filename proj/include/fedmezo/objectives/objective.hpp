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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedmezo/core/dense.hpp"
#include "fedmezo/objectives/dataset.hpp"
#include "fedmezo/objectives/params.hpp"

namespace fedmezo {

enum class ObjectiveKind { kQuadratic, kLogReg, kMlpLora, kMean };

const char* to_string(ObjectiveKind kind);

// A loss F(theta, B) over a fixed sample table. Training only ever calls
// loss(); gradient() is the verification oracle (and the BP baseline).
// Implementations are immutable and safe to share across threads.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual ObjectiveKind kind() const noexcept = 0;
  virtual std::size_t dim() const noexcept = 0;
  // Rows a Batch may index.
  virtual std::size_t sample_count() const noexcept = 0;

  // Unchecked hot path; callers go through eval_loss() unless they have
  // already validated shapes.
  virtual double loss(std::span<const double> params, const Batch& batch) const = 0;
  virtual DenseVector gradient(std::span<const double> params, const Batch& batch) const = 0;

  // Closed-form Hessian where one exists.
  virtual std::optional<DenseMatrix> exact_hessian(std::span<const double> params,
                                                   const Batch& batch) const {
    (void)params;
    (void)batch;
    return std::nullopt;
  }

  virtual std::shared_ptr<const ParamLayout> layout() const {
    return ParamLayout::single(dim());
  }

  Batch full_batch() const;
};

using ObjectiveHandle = std::shared_ptr<const Objective>;

void check_params(const Objective& obj, std::span<const double> params);
void check_batch(const Objective& obj, const Batch& batch);

double eval_loss(const Objective& obj, std::span<const double> params, const Batch& batch);
DenseVector true_grad(const Objective& obj, std::span<const double> params, const Batch& batch);

// Central finite differences of the loss, coordinate by coordinate.
DenseVector finite_difference_grad(const Objective& obj, std::span<const double> params,
                                   const Batch& batch, double h = 1e-5);

// f(theta) = mean_i f_i(theta), each member evaluated on its full sample
// table. This is the global objective of a federation whose clients own
// separate objectives.
class MeanObjective final : public Objective {
 public:
  explicit MeanObjective(std::vector<ObjectiveHandle> members);

  ObjectiveKind kind() const noexcept override { return ObjectiveKind::kMean; }
  std::size_t dim() const noexcept override { return dim_; }
  std::size_t sample_count() const noexcept override { return 1; }
  double loss(std::span<const double> params, const Batch& batch) const override;
  DenseVector gradient(std::span<const double> params, const Batch& batch) const override;
  std::optional<DenseMatrix> exact_hessian(std::span<const double> params,
                                           const Batch& batch) const override;

  const std::vector<ObjectiveHandle>& members() const noexcept { return members_; }

 private:
  std::vector<ObjectiveHandle> members_;
  std::vector<Batch> full_batches_;
  std::size_t dim_ = 0;
};

}  // namespace fedmezo
