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
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fedmezo/core/dense.hpp"
#include "fedmezo/objectives/objective.hpp"
#include "fedmezo/zoo/zoo.hpp"

namespace fedmezo {

enum class OptimizerKind { kFedMeZO, kBpFedAvg };

const char* to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(const std::string& text);

struct LocalConfig {
  std::size_t H = 30;
  ZooConfig zoo;
  std::size_t batch_size = 1;
  OptimizerKind optimizer = OptimizerKind::kFedMeZO;
  RestoreMode restore = RestoreMode::kInPlace;
};

// Most recent train losses of one client, oldest first.
class LossHistory {
 public:
  explicit LossHistory(std::size_t capacity = 5);

  void push(double loss);
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  std::size_t capacity() const noexcept { return capacity_; }
  double last() const;
  // Mean of the newest k entries; k <= size().
  double mean_last(std::size_t k) const;

 private:
  std::size_t capacity_;
  std::deque<double> values_;
};

struct ClientState {
  std::size_t id = 0;
  // f_i over the client's own sample table; batches index into it.
  ObjectiveHandle objective;
  // Rows of the source dataset this client owns (audit/export only).
  std::vector<std::size_t> shard;
  double eta = 1e-3;
  LossHistory history;
  // final - global of the last successful round; empty before the first.
  DenseVector last_update;
};

struct ServerState {
  DenseVector global;
  std::uint64_t round = 0;  // rounds completed so far
  std::uint64_t master_seed = 0;
};

struct LocalResult {
  DenseVector params;
  double train_loss = 0.0;
  bool failed = false;
  std::string error;
};

// H local steps from `global`. Step k (1..H) perturbs with
// derive_seed({master, round, id, k}); batches come from the k = 0 stream.
// A failed step leaves the client at `global` and flags the result.
LocalResult local_train(ClientState& client, std::span<const double> global,
                        const LocalConfig& cfg, std::uint64_t master_seed, std::uint64_t round,
                        std::vector<Batch>* batch_trace = nullptr);

// Mean of the vectors, summed in the order given as offsets from the first
// (so identical inputs average to themselves exactly).
DenseVector aggregate(std::span<const DenseVector> vecs);
// Mean summed in ascending id order, whatever order the inputs arrive in.
DenseVector aggregate(std::span<const std::size_t> ids, std::span<const DenseVector> vecs);

// Supplies per-client learning rates before each round.
class LrStrategy {
 public:
  virtual ~LrStrategy() = default;
  virtual std::vector<double> rates(const std::vector<ClientState>& clients,
                                    const ServerState& server) = 0;
  // Phi used for the last rates() call (empty when not applicable).
  virtual std::vector<double> last_phi() const { return {}; }
};

struct RoundOptions {
  LocalConfig local;
  std::size_t workers = 1;
  // Positions into `clients` in the order they are launched; empty = natural.
  std::vector<std::size_t> execution_order;
  // Global eval loss of the aggregated model; optional.
  std::function<double(std::span<const double>)> evaluate;
  std::uint64_t bytes_per_param = 8;
  bool trace_batches = false;
};

struct RoundRecord {
  std::uint64_t round = 0;  // 1-based
  std::vector<double> train_loss;
  std::vector<double> eta;
  std::vector<double> phi;
  std::vector<bool> failed;
  std::size_t failures = 0;
  double eval_loss = 0.0;
  bool has_eval = false;
  std::uint64_t bytes_up = 0;
  std::uint64_t bytes_down = 0;
  double elapsed_ms = 0.0;
  std::vector<std::vector<Batch>> batches;  // when traced
};

// Broadcast, optional rate adjustment, local training (possibly on several
// threads), aggregation over successful clients, server.round += 1.
// Throws Error(kRoundFailed) when every client fails.
RoundRecord run_round(ServerState& server, std::vector<ClientState>& clients,
                      const RoundOptions& options, LrStrategy* strategy = nullptr);

// FEDMEZO_WORKERS, or 1 when unset/invalid.
std::size_t workers_from_env();

}  // namespace fedmezo
