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

#include <memory>
#include <span>

#include "fedmezo/objectives/dataset.hpp"
#include "fedmezo/objectives/objective.hpp"

namespace fedmezo {

struct LogRegSpec {
  double l2 = 0.0;
};

// Binary logistic regression without intercept:
//   F(w, B) = mean_{s in B} log(1 + exp(-y_s w^T x_s)) + l2/2 ||w||^2,  y in {-1, +1}.
class LogRegObjective final : public Objective {
 public:
  LogRegObjective(std::shared_ptr<const Dataset> data, LogRegSpec spec);

  ObjectiveKind kind() const noexcept override { return ObjectiveKind::kLogReg; }
  std::size_t dim() const noexcept override { return data_->feature_dim(); }
  std::size_t sample_count() const noexcept override { return data_->rows(); }
  double loss(std::span<const double> params, const Batch& batch) const override;
  DenseVector gradient(std::span<const double> params, const Batch& batch) const override;

  const Dataset& data() const noexcept { return *data_; }
  double l2() const noexcept { return spec_.l2; }
  // lambda_max(X^T X) / (4 n) + l2, an upper bound on L.
  double smoothness_bound() const;

 private:
  std::shared_ptr<const Dataset> data_;
  LogRegSpec spec_;
};

}  // namespace fedmezo
