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

#include "fedmezo/objectives/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "fedmezo/core/error.hpp"
#include "fedmezo/core/rng.hpp"

namespace fedmezo {

Dataset::Dataset(DenseMatrix features, std::vector<int> labels,
                 std::optional<std::vector<int>> task_tags)
    : features_(std::move(features)), labels_(std::move(labels)), task_tags_(std::move(task_tags)) {
  if (labels_.size() != features_.rows()) {
    throw Error(ErrorCode::kInvalidDimension, "dataset: label count != feature rows");
  }
  if (task_tags_ && task_tags_->size() != labels_.size()) {
    throw Error(ErrorCode::kInvalidDimension, "dataset: task tag count != feature rows");
  }
  for (int label : labels_) {
    if (label < 0) throw Error(ErrorCode::kInvalidArgument, "dataset: labels must be >= 0");
    num_classes_ = std::max(num_classes_, label + 1);
  }
}

const std::vector<int>& Dataset::task_tags() const {
  if (!task_tags_) throw Error(ErrorCode::kInvalidArgument, "dataset has no task column");
  return *task_tags_;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  if (rows.empty()) throw Error(ErrorCode::kInvalidDimension, "dataset subset must be non-empty");
  std::vector<double> values;
  values.reserve(rows.size() * feature_dim());
  std::vector<int> labels;
  std::optional<std::vector<int>> tasks;
  if (task_tags_) tasks.emplace();
  for (std::size_t r : rows) {
    if (r >= this->rows()) throw Error(ErrorCode::kInvalidArgument, "dataset subset: row out of range");
    auto src = row(r);
    values.insert(values.end(), src.begin(), src.end());
    labels.push_back(labels_[r]);
    if (tasks) tasks->push_back((*task_tags_)[r]);
  }
  Dataset out(DenseMatrix(rows.size(), feature_dim(), std::move(values)), std::move(labels),
              std::move(tasks));
  out.num_classes_ = std::max(out.num_classes_, num_classes_);
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kIo, path.string() + ": missing header");
  const auto header = split_line(line);
  int label_col = -1;
  int task_col = -1;
  std::vector<int> feature_cols;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    if (header[c] == "label") {
      label_col = c;
    } else if (header[c] == "task") {
      task_col = c;
    } else {
      feature_cols.push_back(c);
    }
  }
  if (label_col < 0) throw Error(ErrorCode::kIo, path.string() + ": no `label` column");
  if (feature_cols.empty()) throw Error(ErrorCode::kIo, path.string() + ": no feature columns");

  std::vector<double> values;
  std::vector<int> labels;
  std::vector<int> tasks;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kIo, path.string() + ":" + std::to_string(line_no) +
                                      ": expected " + std::to_string(header.size()) + " cells");
    }
    try {
      for (int c : feature_cols) values.push_back(std::stod(cells[c]));
      labels.push_back(std::stoi(cells[label_col]));
      if (task_col >= 0) tasks.push_back(std::stoi(cells[task_col]));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kIo, path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  if (labels.empty()) throw Error(ErrorCode::kIo, path.string() + ": no data rows");
  std::optional<std::vector<int>> task_tags;
  if (task_col >= 0) task_tags = std::move(tasks);
  DenseMatrix features(labels.size(), feature_cols.size(), std::move(values));
  return Dataset(std::move(features), std::move(labels), std::move(task_tags));
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.precision(17);
  for (std::size_t c = 0; c < ds.feature_dim(); ++c) out << "x" << c << ",";
  out << "label";
  if (ds.has_tasks()) out << ",task";
  out << "\n";
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (double v : ds.row(r)) out << v << ",";
    out << ds.labels()[r];
    if (ds.has_tasks()) out << "," << ds.task_tags()[r];
    out << "\n";
  }
}

Dataset make_synthetic_classification(const SyntheticSpec& spec) {
  if (spec.samples == 0 || spec.dim == 0 || spec.classes < 2) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic dataset needs samples, dim >= 1 and classes >= 2");
  }
  SeedStream stream(salted_seed(spec.seed, 0xda7a));
  const double feature_sd = 1.0 / std::sqrt(static_cast<double>(spec.dim));
  const std::size_t teacher_rows = spec.classes == 2 ? 1 : static_cast<std::size_t>(spec.classes);
  DenseVector teacher = sample_gaussian(stream, teacher_rows * spec.dim);
  const int n_tasks = std::max(spec.tasks, 1);
  DenseVector task_offsets = sample_gaussian(stream, static_cast<std::size_t>(n_tasks) * spec.dim);

  std::vector<double> values(spec.samples * spec.dim);
  std::vector<int> labels(spec.samples);
  std::vector<int> tasks(spec.samples);
  std::vector<double> scores(teacher_rows);
  for (std::size_t s = 0; s < spec.samples; ++s) {
    const int task = static_cast<int>(s % static_cast<std::size_t>(n_tasks));
    tasks[s] = task;
    double* x = values.data() + s * spec.dim;
    for (std::size_t j = 0; j < spec.dim; ++j) {
      const double offset = spec.tasks > 0 ? 0.5 * feature_sd * task_offsets[task * spec.dim + j] : 0.0;
      x[j] = offset + feature_sd * box_muller(stream).first;
    }
    for (std::size_t c = 0; c < teacher_rows; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < spec.dim; ++j) acc += teacher[c * spec.dim + j] * x[j];
      scores[c] = spec.margin * acc;
    }
    if (spec.classes == 2) {
      const double p = 1.0 / (1.0 + std::exp(-scores[0]));
      labels[s] = stream.next_uniform() < p ? 1 : 0;
    } else {
      for (double& sc : scores) sc += 0.5 * box_muller(stream).first;
      labels[s] = static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
    }
  }
  std::optional<std::vector<int>> task_tags;
  if (spec.tasks > 0) task_tags = std::move(tasks);
  return Dataset(DenseMatrix(spec.samples, spec.dim, std::move(values)), std::move(labels),
                 std::move(task_tags));
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> holdout_split(
    std::size_t rows, double eval_fraction, std::uint64_t seed) {
  if (eval_fraction < 0.0 || eval_fraction >= 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "eval fraction must be in [0, 1)");
  }
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SeedStream stream(salted_seed(seed, 0x401d));
  for (std::size_t i = rows; i > 1; --i) {
    std::swap(order[i - 1], order[stream.next_below(i)]);
  }
  const auto n_eval = static_cast<std::size_t>(std::llround(eval_fraction * static_cast<double>(rows)));
  std::vector<std::size_t> eval(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_eval));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_eval), order.end());
  std::sort(eval.begin(), eval.end());
  std::sort(train.begin(), train.end());
  return {std::move(train), std::move(eval)};
}

}  // namespace fedmezo
