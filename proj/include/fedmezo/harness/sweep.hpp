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

#include <filesystem>
#include <string>
#include <vector>

#include "fedmezo/harness/config.hpp"
#include "json.hpp"

namespace fedmezo {

// Axis names: mu, H, N, splitter, lr, strategy.
// splitter values: iid | meta | dirichlet | dirichlet:<beta>.
// lr values: an absolute rate, or "<m>x" for m times the theory ceiling.
// strategy values: personalization signal names.
void apply_axis_value(ExperimentConfig& cfg, const std::string& axis, const std::string& value);

struct SweepResult {
  nlohmann::json summary;  // per value: output dir, final loss stats or error
  std::filesystem::path csv;
  bool ok = true;
};

// One run per value under <output_dir>/<axis>=<value>, all with the config's
// seed, then <output_dir>/sweep_<axis>.csv with columns
// axis,value,replicate,round,eval_loss. A failing run is recorded and the
// sweep continues.
SweepResult sweep(const ExperimentConfig& cfg, const std::string& axis,
                  const std::vector<std::string>& values);

}  // namespace fedmezo
