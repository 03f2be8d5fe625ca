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

#include "fedmezo/federation/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <thread>

#include "fedmezo/core/error.hpp"
#include "fedmezo/core/rng.hpp"
#include "fedmezo/federation/comm.hpp"

namespace fedmezo {

const char* to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kFedMeZO ? "fedmezo" : "bp-fedavg";
}

OptimizerKind parse_optimizer_kind(const std::string& text) {
  if (text == "fedmezo") return OptimizerKind::kFedMeZO;
  if (text == "bp-fedavg") return OptimizerKind::kBpFedAvg;
  throw Error(ErrorCode::kInvalidArgument, "unknown optimizer: " + text);
}

LossHistory::LossHistory(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 5)) {}

void LossHistory::push(double loss) {
  values_.push_back(loss);
  if (values_.size() > capacity_) values_.pop_front();
}

double LossHistory::last() const {
  if (values_.empty()) throw Error(ErrorCode::kInvalidArgument, "loss history is empty");
  return values_.back();
}

double LossHistory::mean_last(std::size_t k) const {
  if (k == 0 || k > values_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "loss history shorter than requested window");
  }
  return std::accumulate(values_.end() - static_cast<std::ptrdiff_t>(k), values_.end(), 0.0) /
         static_cast<double>(k);
}

LocalResult local_train(ClientState& client, std::span<const double> global,
                        const LocalConfig& cfg, std::uint64_t master_seed, std::uint64_t round,
                        std::vector<Batch>* batch_trace) {
  if (cfg.H == 0) throw Error(ErrorCode::kInvalidArgument, "H must be >= 1");
  if (cfg.batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch size must be >= 1");
  const Objective& obj = *client.objective;
  check_params(obj, global);

  LocalResult out;
  out.params = DenseVector::from(global);
  SeedStream batch_stream(derive_seed(RngRecipe{master_seed, round, client.id, 0}));
  Batch batch;
  batch.indices.resize(cfg.batch_size);
  double loss_sum = 0.0;
  try {
    for (std::size_t k = 1; k <= cfg.H; ++k) {
      for (auto& idx : batch.indices) idx = batch_stream.next_below(obj.sample_count());
      if (batch_trace) batch_trace->push_back(batch);
      if (cfg.optimizer == OptimizerKind::kFedMeZO) {
        const std::uint64_t seed = derive_seed(RngRecipe{master_seed, round, client.id, k});
        const StepOutcome step =
            mezo_step_inplace(obj, out.params.span(), batch, cfg.zoo, client.eta, seed, cfg.restore);
        loss_sum += step.loss_plus;
      } else {
        const double l = obj.loss(out.params, batch);
        if (!std::isfinite(l)) throw NumericalOverflowError("non-finite loss", out.params.norm());
        loss_sum += l;
        out.params.axpy(-client.eta, obj.gradient(out.params, batch));
      }
    }
    if (!out.params.all_finite()) {
      throw NumericalOverflowError("local parameters diverged", out.params.norm());
    }
  } catch (const Error& e) {
    out.params = DenseVector::from(global);
    out.failed = true;
    out.error = e.what();
    out.train_loss = 0.0;
    client.last_update = DenseVector(global.size());
    return out;
  }
  out.train_loss = loss_sum / static_cast<double>(cfg.H);
  client.last_update = out.params;
  client.last_update -= global;
  return out;
}

namespace {

// x_0 + sum_j (x_j - x_0) / n over `order`: identical inputs come back exactly.
DenseVector anchored_mean(std::span<const DenseVector> vecs, std::span<const std::size_t> order) {
  const DenseVector& anchor = vecs[order.front()];
  const std::size_t d = anchor.size();
  DenseVector acc(d);
  for (std::size_t pos : order) {
    if (vecs[pos].size() != d) throw Error(ErrorCode::kInvalidArgument, "aggregate: length mismatch");
    for (std::size_t i = 0; i < d; ++i) acc[i] += vecs[pos][i] - anchor[i];
  }
  const double inv = 1.0 / static_cast<double>(order.size());
  for (std::size_t i = 0; i < d; ++i) acc[i] = anchor[i] + acc[i] * inv;
  return acc;
}

}  // namespace

DenseVector aggregate(std::span<const DenseVector> vecs) {
  if (vecs.empty()) throw Error(ErrorCode::kInvalidArgument, "aggregate needs at least one vector");
  std::vector<std::size_t> order(vecs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  return anchored_mean(vecs, order);
}

DenseVector aggregate(std::span<const std::size_t> ids, std::span<const DenseVector> vecs) {
  if (ids.size() != vecs.size()) throw Error(ErrorCode::kInvalidArgument, "aggregate: ids/vecs mismatch");
  if (vecs.empty()) throw Error(ErrorCode::kInvalidArgument, "aggregate needs at least one vector");
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  return anchored_mean(vecs, order);
}

std::size_t workers_from_env() {
  const char* raw = std::getenv("FEDMEZO_WORKERS");
  if (!raw) return 1;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  return (end != raw && v >= 1) ? static_cast<std::size_t>(v) : 1;
}

RoundRecord run_round(ServerState& server, std::vector<ClientState>& clients,
                      const RoundOptions& options, LrStrategy* strategy) {
  const auto started = std::chrono::steady_clock::now();
  const std::size_t n = clients.size();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "round needs at least one client");

  RoundRecord rec;
  rec.round = server.round + 1;
  if (strategy) {
    const auto rates = strategy->rates(clients, server);
    if (rates.size() != n) throw Error(ErrorCode::kInvalidArgument, "strategy returned wrong rate count");
    for (std::size_t i = 0; i < n; ++i) clients[i].eta = rates[i];
    rec.phi = strategy->last_phi();
  }
  for (const auto& c : clients) rec.eta.push_back(c.eta);

  std::vector<std::size_t> order = options.execution_order;
  if (order.empty()) {
    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  {
    std::vector<std::size_t> check = order;
    std::sort(check.begin(), check.end());
    bool valid = check.size() == n;
    for (std::size_t i = 0; valid && i < n; ++i) valid = check[i] == i;
    if (!valid) {
      throw Error(ErrorCode::kInvalidArgument, "execution order must be a permutation of the clients");
    }
  }

  std::vector<LocalResult> results(n);
  std::vector<std::vector<Batch>> traces(options.trace_batches ? n : 0);
  const DenseVector broadcast = server.global;
  auto work = [&](std::size_t pos) {
    results[pos] = local_train(clients[pos], broadcast, options.local, server.master_seed,
                               server.round, options.trace_batches ? &traces[pos] : nullptr);
  };
  const std::size_t workers = std::min(std::max<std::size_t>(options.workers, 1), n);
  if (workers == 1) {
    for (std::size_t pos : order) work(pos);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t k = next.fetch_add(1); k < n; k = next.fetch_add(1)) work(order[k]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<std::size_t> ids;
  std::vector<DenseVector> ok;
  rec.failed.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    rec.train_loss.push_back(results[i].train_loss);
    if (results[i].failed) {
      rec.failed[i] = true;
      ++rec.failures;
      continue;
    }
    clients[i].history.push(results[i].train_loss);
    ids.push_back(clients[i].id);
    ok.push_back(std::move(results[i].params));
  }
  if (ok.empty()) {
    throw Error(ErrorCode::kRoundFailed,
                "every client failed in round " + std::to_string(rec.round) + ": " + results[0].error);
  }
  server.global = aggregate(ids, ok);
  server.round += 1;

  const std::uint64_t per_client = comm_cost(server.global.size(), options.bytes_per_param);
  rec.bytes_up = n * per_client;
  rec.bytes_down = n * per_client;
  if (options.evaluate) {
    rec.eval_loss = options.evaluate(server.global);
    rec.has_eval = true;
  }
  if (options.trace_batches) rec.batches = std::move(traces);
  rec.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return rec;
}

}  // namespace fedmezo
