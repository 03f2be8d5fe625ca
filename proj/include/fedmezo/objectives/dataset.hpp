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
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "fedmezo/core/dense.hpp"

namespace fedmezo {

// Row indices into a dataset (or into a quadratic's sample table).
struct Batch {
  std::vector<std::size_t> indices;
};

class Dataset {
 public:
  Dataset(DenseMatrix features, std::vector<int> labels,
          std::optional<std::vector<int>> task_tags = std::nullopt);

  std::size_t rows() const noexcept { return features_.rows(); }
  std::size_t feature_dim() const noexcept { return features_.cols(); }
  const DenseMatrix& features() const noexcept { return features_; }
  std::span<const double> row(std::size_t r) const { return features_.row(r); }
  const std::vector<int>& labels() const noexcept { return labels_; }
  bool has_tasks() const noexcept { return task_tags_.has_value(); }
  const std::vector<int>& task_tags() const;
  int num_classes() const noexcept { return num_classes_; }

  Dataset subset(std::span<const std::size_t> rows) const;

 private:
  DenseMatrix features_;
  std::vector<int> labels_;
  std::optional<std::vector<int>> task_tags_;
  int num_classes_ = 0;
};

// CSV with a header row: float feature columns, an integer `label` column and
// an optional integer `task` column (any position).
Dataset load_csv(const std::filesystem::path& path);
void save_csv(const Dataset& ds, const std::filesystem::path& path);

struct SyntheticSpec {
  std::size_t samples = 1000;
  std::size_t dim = 20;
  int classes = 2;
  int tasks = 0;  // 0 = no task column
  double margin = 4.0;
  std::uint64_t seed = 0;
};

// Features ~ N(0, I/dim) plus a per-task offset; labels from a random linear
// teacher (logistic draw for 2 classes, noisy argmax otherwise).
Dataset make_synthetic_classification(const SyntheticSpec& spec);

// Deterministic held-out split: returns (train rows, eval rows).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> holdout_split(
    std::size_t rows, double eval_fraction, std::uint64_t seed);

}  // namespace fedmezo
