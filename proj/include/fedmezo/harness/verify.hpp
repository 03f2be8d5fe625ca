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

#include "json.hpp"

namespace fedmezo {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // measured vs expected
};

// Fast oracle suite: seed derivation, calculators against the golden file,
// estimator Monte Carlo, in-place/snapshot parity and determinism replays.
// A check whose golden entry is missing or malformed fails on its own.
std::vector<CheckResult> run_verify(const std::filesystem::path& goldens);

nlohmann::json to_json(const std::vector<CheckResult>& checks);

}  // namespace fedmezo
