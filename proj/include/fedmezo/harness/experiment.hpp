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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fedmezo/core/dense.hpp"
#include "fedmezo/federation/split.hpp"
#include "fedmezo/harness/config.hpp"
#include "fedmezo/objectives/dataset.hpp"
#include "fedmezo/objectives/objective.hpp"
#include "json.hpp"

namespace fedmezo {

// Everything a run needs, built deterministically from the config seed.
struct Problem {
  std::vector<ObjectiveHandle> clients;
  Shards shards;  // dataset rows per client; empty for quadratics
  std::shared_ptr<const Dataset> data;
  ObjectiveHandle train_objective;  // mean of the client objectives
  ObjectiveHandle eval_objective;
  Batch eval_batch;
  DenseVector init;
  std::optional<double> f_star;  // minimum of train_objective when known
  double L = 0.0;
  double c_g = 1.0;
  double sigma_g_sq = 0.0;
  double lr_bound = 0.0;
  double eta0 = 0.0;
};

// Also appends a warning to cfg.warnings when the rate exceeds the ceiling.
Problem build_problem(ExperimentConfig& cfg);

// Master seed of replicate r.
std::uint64_t replicate_seed(std::uint64_t seed, std::size_t r);

struct RunOverrides {
  std::vector<std::size_t> execution_order;  // permutation of client positions
  std::optional<std::size_t> workers;
  bool write_files = true;
};

struct ReplicateTrace {
  std::uint64_t master_seed = 0;
  std::vector<double> eval_loss;  // index = round, 0 = before training
  std::vector<std::vector<double>> train_loss;
  std::vector<std::vector<double>> eta;
  DenseVector final_params;
  bool failed = false;
  std::string error;
};

struct RunResult {
  std::vector<ReplicateTrace> replicates;
  nlohmann::json summary;
  bool ok = true;
};

// Writes <output_dir>/metrics.jsonl, summary.json, config.json, shards.json
// (datasets only) and timing.jsonl (record_timing only).
RunResult run_experiment(ExperimentConfig cfg, const RunOverrides& overrides = {});

// Theory report for the configured problem: measured constants, effective
// rank, ceilings and bounds.
nlohmann::json diagnose(ExperimentConfig cfg);

}  // namespace fedmezo
