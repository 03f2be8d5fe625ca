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

#include "fedmezo/federation/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedmezo/core/error.hpp"
#include "fedmezo/core/rng.hpp"

namespace fedmezo {

const char* to_string(SplitKind kind) {
  switch (kind) {
    case SplitKind::kIid: return "iid";
    case SplitKind::kDirichlet: return "dirichlet";
    case SplitKind::kMetaByTask: return "meta";
  }
  return "unknown";
}

SplitKind parse_split_kind(const std::string& text) {
  if (text == "iid") return SplitKind::kIid;
  if (text == "dirichlet") return SplitKind::kDirichlet;
  if (text == "meta") return SplitKind::kMetaByTask;
  throw Error(ErrorCode::kInvalidArgument, "unknown splitter: " + text);
}

namespace {

void shuffle(std::vector<std::size_t>& v, SeedStream& stream) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[stream.next_below(i)]);
}

Shards split_iid(std::vector<std::size_t> rows, const SplitSpec& spec) {
  SeedStream stream(salted_seed(spec.seed, 0x11d));
  shuffle(rows, stream);
  Shards out(spec.n_clients);
  for (std::size_t k = 0; k < rows.size(); ++k) out[k % spec.n_clients].push_back(rows[k]);
  return out;
}

Shards split_dirichlet(const Dataset& ds, const std::vector<std::size_t>& rows,
                       const SplitSpec& spec) {
  if (!(spec.beta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "dirichlet beta must be > 0");
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t r : rows) by_label[ds.labels()[r]].push_back(r);
  const std::size_t n = spec.n_clients;
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    SeedStream stream(derive_seed(RngRecipe{spec.seed, attempt, 0, 0xd1c}));
    Shards out(n);
    std::vector<double> p(n);
    for (auto& [label, members] : by_label) {
      std::vector<std::size_t> idx = members;
      shuffle(idx, stream);
      double total = 0.0;
      for (double& v : p) {
        v = sample_gamma(stream, spec.beta);
        total += v;
      }
      // Cumulative proportions decide the cut points; the last client takes
      // whatever rounding leaves over.
      double cum = 0.0;
      std::size_t start = 0;
      for (std::size_t i = 0; i < n; ++i) {
        cum += p[i] / total;
        std::size_t stop = i + 1 == n ? idx.size()
                                      : std::min(idx.size(), static_cast<std::size_t>(std::llround(
                                                                 cum * static_cast<double>(idx.size()))));
        stop = std::max(stop, start);
        out[i].insert(out[i].end(), idx.begin() + static_cast<std::ptrdiff_t>(start),
                      idx.begin() + static_cast<std::ptrdiff_t>(stop));
        start = stop;
      }
    }
    if (std::none_of(out.begin(), out.end(), [](const auto& s) { return s.empty(); })) return out;
  }
  throw Error(ErrorCode::kEmptyShard, "dirichlet split left a client empty after 100 draws");
}

Shards split_meta(const Dataset& ds, const std::vector<std::size_t>& rows, const SplitSpec& spec) {
  if (!ds.has_tasks()) throw Error(ErrorCode::kInvalidArgument, "meta split needs a task column");
  Shards out(spec.n_clients);
  for (std::size_t r : rows) {
    const int tag = ds.task_tags()[r];
    std::size_t group;
    if (auto it = spec.task_groups.find(tag); it != spec.task_groups.end()) {
      group = it->second;
    } else {
      group = static_cast<std::size_t>(tag < 0 ? -tag : tag) % spec.n_clients;
    }
    if (group >= spec.n_clients) {
      throw Error(ErrorCode::kInvalidArgument, "task group maps outside the client range");
    }
    out[group].push_back(r);
  }
  return out;
}

}  // namespace

Shards split_rows(const Dataset& ds, const std::vector<std::size_t>& rows, const SplitSpec& spec) {
  if (spec.n_clients == 0) throw Error(ErrorCode::kInvalidArgument, "need at least one client");
  if (rows.size() < spec.n_clients) {
    throw Error(ErrorCode::kInvalidArgument, "fewer rows than clients");
  }
  Shards out;
  switch (spec.kind) {
    case SplitKind::kIid: out = split_iid(rows, spec); break;
    case SplitKind::kDirichlet: out = split_dirichlet(ds, rows, spec); break;
    case SplitKind::kMetaByTask: out = split_meta(ds, rows, spec); break;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].empty()) {
      throw Error(ErrorCode::kEmptyShard, "client " + std::to_string(i) + " received no rows");
    }
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

Shards split_dataset(const Dataset& ds, const SplitSpec& spec) {
  std::vector<std::size_t> rows(ds.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return split_rows(ds, rows, spec);
}

nlohmann::json shards_to_json(const Shards& shards) {
  nlohmann::json clients = nlohmann::json::array();
  for (std::size_t i = 0; i < shards.size(); ++i) {
    clients.push_back({{"id", i}, {"indices", shards[i]}});
  }
  return {{"clients", clients}};
}

}  // namespace fedmezo
