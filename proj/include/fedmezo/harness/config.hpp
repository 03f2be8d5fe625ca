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
#include <string>
#include <vector>

#include "json.hpp"

namespace fedmezo {

struct ObjectiveConfig {
  std::string kind = "quadratic";  // quadratic | logreg | mlp-lora

  // quadratic
  std::size_t dim = 10;
  // One value (constant), two values (linspace lo..hi) or `dim` values.
  std::vector<double> spectrum = {1.0};
  double optimum_scale = 1.0;   // theta* ~ optimum_scale * N(0, I)
  std::size_t block_size = 0;   // > 0: sparse-block sample table
  std::size_t repeats = 1;
  std::size_t noise_samples = 0;  // > 0: per-sample target noise table
  double target_noise = 0.0;
  double shift_scale = 0.0;       // client heterogeneity
  double curvature_spread = 0.0;

  // logreg / mlp-lora
  std::string data;  // CSV path; synthetic data when empty
  std::size_t samples = 1000;
  std::size_t features = 20;
  std::optional<int> classes;  // default 2 (logreg) / 4 (mlp-lora)
  int tasks = 0;
  double margin = 4.0;
  double l2 = 0.0;
  std::vector<std::size_t> hidden = {16, 16};
  std::size_t rank = 4;
  double lora_alpha = 8.0;
};

struct SplitConfig {
  std::string kind = "iid";  // iid | dirichlet | meta
  double beta = 0.5;
};

struct PersonalizationConfig {
  std::string signal = "disabled";
  std::optional<double> alpha;  // default 0.5 * lr
  std::string form = "additive";
  std::string normalization = "max-abs";
  std::optional<double> eta_min;
  std::optional<double> eta_max;
  bool clamp_to_bound = false;
};

struct ExperimentConfig {
  ObjectiveConfig objective;
  std::size_t N = 4;
  std::size_t T = 500;
  std::size_t H = 30;
  double mu = 1e-3;
  std::size_t perturbations = 1;
  std::optional<double> lr;
  std::optional<double> lr_multiple_of_bound;  // used when lr is absent; default 0.5
  std::size_t batch_size = 1;
  SplitConfig split;
  PersonalizationConfig personalization;
  std::string optimizer = "fedmezo";  // fedmezo | bp-fedavg
  std::string restore = "inplace";    // inplace | snapshot
  std::uint64_t seed = 0;
  std::size_t replicates = 1;
  std::string output_dir = "runs/default";
  double eval_fraction = 0.1;
  std::size_t patience = 0;  // 0 = no early stopping
  bool record_timing = false;
  std::size_t bytes_per_param = 8;
  std::size_t workers = 0;  // 0 = FEDMEZO_WORKERS or 1

  // Filled during validation, not read from the file.
  std::vector<std::string> warnings;
};

// Schema check plus defaults. Unknown keys and bad values throw ConfigError
// naming the key.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

// Fully resolved config (every field, defaults included).
nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace fedmezo
