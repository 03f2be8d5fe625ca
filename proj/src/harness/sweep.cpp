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

#include "fedmezo/harness/sweep.hpp"

#include <fstream>
#include <iomanip>
#include <limits>

#include "fedmezo/core/error.hpp"
#include "fedmezo/harness/experiment.hpp"

namespace fedmezo {

namespace {

double to_double(const std::string& axis, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(axis, "not a number: " + text);
}

std::size_t to_count(const std::string& axis, const std::string& text) {
  const double v = to_double(axis, text);
  if (v < 1.0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
    throw ConfigError(axis, "not a positive integer: " + text);
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

void apply_axis_value(ExperimentConfig& cfg, const std::string& axis, const std::string& value) {
  if (axis == "mu") {
    cfg.mu = to_double(axis, value);
    if (!(cfg.mu > 0.0)) throw ConfigError(axis, "must be > 0");
  } else if (axis == "H") {
    cfg.H = to_count(axis, value);
  } else if (axis == "N") {
    cfg.N = to_count(axis, value);
  } else if (axis == "splitter") {
    const auto colon = value.find(':');
    cfg.split.kind = value.substr(0, colon);
    if (colon != std::string::npos) cfg.split.beta = to_double(axis, value.substr(colon + 1));
    if (cfg.split.kind != "iid" && cfg.split.kind != "dirichlet" && cfg.split.kind != "meta") {
      throw ConfigError(axis, "unknown splitter " + value);
    }
  } else if (axis == "lr") {
    if (!value.empty() && value.back() == 'x') {
      cfg.lr.reset();
      cfg.lr_multiple_of_bound = to_double(axis, value.substr(0, value.size() - 1));
    } else {
      cfg.lr_multiple_of_bound.reset();
      cfg.lr = to_double(axis, value);
    }
  } else if (axis == "strategy") {
    cfg.personalization.signal = value;
    if (value != "disabled" && value != "random" && value != "round-loss" &&
        value != "five-round-loss" && value != "update-norm") {
      throw ConfigError(axis, "unknown strategy " + value);
    }
  } else {
    throw ConfigError("axis", "unknown sweep axis " + axis);
  }
}

SweepResult sweep(const ExperimentConfig& cfg, const std::string& axis,
                  const std::vector<std::string>& values) {
  if (values.empty()) throw ConfigError("values", "sweep needs at least one value");
  // Validate every value before running anything.
  for (const auto& v : values) {
    ExperimentConfig probe = cfg;
    apply_axis_value(probe, axis, v);
  }
  const std::filesystem::path base(cfg.output_dir);
  std::filesystem::create_directories(base);
  SweepResult result;
  result.csv = base / ("sweep_" + axis + ".csv");
  std::ofstream csv(result.csv, std::ios::trunc);
  if (!csv) throw Error(ErrorCode::kIo, "cannot write " + result.csv.string());
  csv << std::setprecision(std::numeric_limits<double>::max_digits10);
  csv << "axis,value,replicate,round,eval_loss\n";
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& v : values) {
    ExperimentConfig run_cfg = cfg;
    apply_axis_value(run_cfg, axis, v);
    run_cfg.output_dir = (base / (axis + "=" + v)).string();
    nlohmann::json entry = {{"value", v}, {"output_dir", run_cfg.output_dir}};
    try {
      const RunResult run = run_experiment(run_cfg);
      for (std::size_t r = 0; r < run.replicates.size(); ++r) {
        const auto& losses = run.replicates[r].eval_loss;
        for (std::size_t t = 0; t < losses.size(); ++t) {
          csv << axis << ',' << v << ',' << r << ',' << t << ',' << losses[t] << '\n';
        }
      }
      entry["final_eval_loss"] = run.summary["final_eval_loss"];
      entry["ok"] = run.ok;
      if (!run.ok) result.ok = false;
    } catch (const Error& e) {
      entry["ok"] = false;
      entry["error"] = e.what();
      result.ok = false;
    }
    runs.push_back(entry);
  }
  result.summary = {{"axis", axis}, {"runs", runs}, {"csv", result.csv.string()}};
  std::ofstream out(base / ("sweep_" + axis + ".json"), std::ios::trunc);
  out << result.summary.dump(2) << '\n';
  return result;
}

}  // namespace fedmezo
