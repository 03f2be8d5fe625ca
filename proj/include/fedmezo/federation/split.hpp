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
#include <map>
#include <string>
#include <vector>

#include "fedmezo/objectives/dataset.hpp"
#include "json.hpp"

namespace fedmezo {

enum class SplitKind { kIid, kDirichlet, kMetaByTask };

const char* to_string(SplitKind kind);
SplitKind parse_split_kind(const std::string& text);

struct SplitSpec {
  SplitKind kind = SplitKind::kIid;
  std::size_t n_clients = 1;
  double beta = 0.5;  // Dirichlet concentration
  // MetaByTask: task tag -> client. Tags missing from the map go to
  // tag % n_clients.
  std::map<int, std::size_t> task_groups;
  std::uint64_t seed = 0;
};

// Row indices per client, each sorted ascending. The shards are disjoint and
// cover every row exactly once.
using Shards = std::vector<std::vector<std::size_t>>;

Shards split_dataset(const Dataset& ds, const SplitSpec& spec);

// Same, over a subset of the dataset's rows (e.g. the training part of a
// held-out split). Returned indices are rows of `ds`.
Shards split_rows(const Dataset& ds, const std::vector<std::size_t>& rows, const SplitSpec& spec);

// {"clients": [{"id": 0, "indices": [...]}, ...]}
nlohmann::json shards_to_json(const Shards& shards);

}  // namespace fedmezo
