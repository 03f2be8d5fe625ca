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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include "fedmezo/core/error.hpp"
#include "fedmezo/core/rng.hpp"
#include "fedmezo/federation/comm.hpp"
#include "fedmezo/federation/heterogeneity.hpp"
#include "fedmezo/federation/protocol.hpp"
#include "fedmezo/federation/split.hpp"
#include "fedmezo/objectives/dataset.hpp"
#include "fedmezo/objectives/quadratic.hpp"

namespace fedmezo {
namespace {

Dataset labelled(std::vector<int> labels, std::optional<std::vector<int>> tags = std::nullopt) {
  DenseMatrix x(labels.size(), 2, 0.5);
  return Dataset(std::move(x), std::move(labels), std::move(tags));
}

void expect_disjoint_cover(const Shards& shards, std::size_t rows) {
  std::vector<int> seen(rows, 0);
  for (const auto& s : shards) {
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    for (auto r : s) ++seen[r];
  }
  for (int c : seen) EXPECT_EQ(c, 1);
}

TEST(Split, IidNineIntoThree) {
  const auto ds = labelled({0, 1, 0, 1, 0, 1, 0, 1, 0});
  const auto shards = split_dataset(ds, SplitSpec{SplitKind::kIid, 3, 0.5, {}, 1});
  ASSERT_EQ(shards.size(), 3u);
  for (const auto& s : shards) EXPECT_EQ(s.size(), 3u);
  expect_disjoint_cover(shards, 9);
}

TEST(Split, IidSizesDifferByAtMostOne) {
  const auto ds = labelled(std::vector<int>(103, 0));
  const auto shards = split_dataset(ds, SplitSpec{SplitKind::kIid, 7, 0.5, {}, 2});
  std::size_t lo = 1000;
  std::size_t hi = 0;
  for (const auto& s : shards) {
    lo = std::min(lo, s.size());
    hi = std::max(hi, s.size());
  }
  EXPECT_LE(hi - lo, 1u);
  expect_disjoint_cover(shards, 103);
}

TEST(Split, DirichletLargeBetaTracksGlobalProportions) {
  std::vector<int> labels;
  for (int i = 0; i < 3000; ++i) labels.push_back(i % 3 == 0 ? 1 : 0);  // 1/3 positive
  const auto ds = labelled(labels);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto shards = split_dataset(ds, SplitSpec{SplitKind::kDirichlet, 4, 1e6, {}, seed});
    expect_disjoint_cover(shards, 3000);
    for (const auto& s : shards) {
      double pos = 0.0;
      for (auto r : s) pos += labels[r];
      EXPECT_NEAR(pos / static_cast<double>(s.size()), 1.0 / 3.0, 0.02) << "seed " << seed;
    }
  }
}

TEST(Split, DirichletSmallBetaIsSkewed) {
  std::vector<int> labels;
  for (int i = 0; i < 2000; ++i) labels.push_back(i % 2);
  const auto ds = labelled(labels);
  const auto shards = split_dataset(ds, SplitSpec{SplitKind::kDirichlet, 4, 0.1, {}, 3});
  expect_disjoint_cover(shards, 2000);
  double spread = 0.0;
  for (const auto& s : shards) {
    double pos = 0.0;
    for (auto r : s) pos += labels[r];
    spread = std::max(spread, std::abs(pos / static_cast<double>(s.size()) - 0.5));
  }
  EXPECT_GT(spread, 0.1);
}

TEST(Split, MetaByTaskOneTaskPerShard) {
  std::vector<int> labels(30, 0);
  std::vector<int> tags;
  for (int i = 0; i < 30; ++i) tags.push_back(i % 3);
  const auto ds = labelled(labels, tags);
  const auto shards = split_dataset(ds, SplitSpec{SplitKind::kMetaByTask, 3, 0.5, {}, 0});
  for (const auto& s : shards) {
    ASSERT_FALSE(s.empty());
    for (auto r : s) EXPECT_EQ(tags[r], tags[s.front()]);
  }
  expect_disjoint_cover(shards, 30);
}

TEST(Split, TooFewRowsForIid) {
  const auto ds = labelled({0, 1});
  try {
    split_dataset(ds, SplitSpec{SplitKind::kIid, 3, 0.5, {}, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(Split, DirichletEmptyShardAfterRetries) {
  // Three rows and very peaked proportions: some client always ends up empty.
  const auto ds = labelled({0, 0, 0});
  try {
    split_dataset(ds, SplitSpec{SplitKind::kDirichlet, 3, 1e-3, {}, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyShard);
  }
}

TEST(Split, ExportJson) {
  const Shards s{{0, 2}, {1}};
  const auto j = shards_to_json(s);
  EXPECT_EQ(j["clients"][1]["id"], 1);
  EXPECT_EQ(j["clients"][0]["indices"], nlohmann::json::array({0, 2}));
}

TEST(Aggregate, MeanExample) {
  const std::vector<DenseVector> v{{1.0, 2.0}, {3.0, 4.0}};
  EXPECT_EQ(aggregate(v), (DenseVector{2.0, 3.0}));
}

TEST(Aggregate, IdempotentOnIdenticalClients) {
  const DenseVector x{0.1, 0.7, -3.3};
  const std::vector<DenseVector> v(5, x);
  EXPECT_EQ(aggregate(v), x);
}

TEST(Aggregate, PermutationInvariantBitwise) {
  SeedStream s(1);
  std::vector<DenseVector> v;
  for (int i = 0; i < 6; ++i) v.push_back(sample_gaussian(s, 9));
  std::vector<std::size_t> ids{0, 1, 2, 3, 4, 5};
  const auto ref = aggregate(ids, v);
  std::vector<std::size_t> perm{4, 2, 5, 0, 3, 1};
  std::vector<DenseVector> pv;
  for (auto p : perm) pv.push_back(v[p]);
  EXPECT_EQ(aggregate(perm, pv), ref);
}

TEST(Aggregate, LengthMismatch) {
  const std::vector<DenseVector> v{{1.0, 2.0}, {3.0}};
  try {
    aggregate(v);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

ClientState quad_client(std::size_t id, std::shared_ptr<const Objective> obj, double eta) {
  ClientState c;
  c.id = id;
  c.objective = std::move(obj);
  c.eta = eta;
  return c;
}

TEST(LocalTrain, ZeroRateReturnsGlobal) {
  auto q = std::make_shared<QuadraticObjective>(
      QuadraticSpec{DenseMatrix::identity(6), DenseVector(6), 0.0, {}});
  auto c = quad_client(0, q, 0.0);
  SeedStream s(2);
  const auto global = sample_gaussian(s, 6);
  LocalConfig cfg;
  cfg.H = 10;
  const auto r = local_train(c, global, cfg, 5, 0);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(r.params[i], global[i], 1e-15 * 30 + 1e-18);
}

TEST(LocalTrain, DeterministicOutputs) {
  auto q = std::make_shared<QuadraticObjective>(
      make_target_noise_quadratic(DenseMatrix::identity(4), DenseVector(4), 8, 0.3, 1));
  auto c1 = quad_client(2, q, 0.05);
  auto c2 = quad_client(2, q, 0.05);
  const DenseVector global{1.0, -1.0, 0.5, 0.0};
  LocalConfig cfg;
  cfg.H = 12;
  cfg.batch_size = 3;
  const auto a = local_train(c1, global, cfg, 9, 4);
  const auto b = local_train(c2, global, cfg, 9, 4);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.train_loss, b.train_loss);
  EXPECT_EQ(c1.last_update, c2.last_update);
}

TEST(RunRound, SingleClientSingleStepIsOneMezoStep) {
  auto q = std::make_shared<QuadraticObjective>(
      QuadraticSpec{DenseMatrix::identity(3), DenseVector(3), 0.0, {}});
  std::vector<ClientState> clients{quad_client(0, q, 0.1)};
  ServerState server{DenseVector{1.0, 2.0, 3.0}, 0, 42};
  RoundOptions opt;
  opt.local.H = 1;
  run_round(server, clients, opt);
  DenseVector expect{1.0, 2.0, 3.0};
  mezo_step_inplace(*q, expect.span(), Batch{{0}}, ZooConfig{}, 0.1, derive_seed(RngRecipe{42, 0, 0, 1}));
  EXPECT_EQ(server.global, expect);
  EXPECT_EQ(server.round, 1u);
}

std::vector<ClientState> hetero_clients(std::size_t n) {
  QuadraticSpec base{DenseMatrix::identity(5), DenseVector(5), 0.0, {}};
  const auto specs = make_client_quadratics(n, base, Heterogeneity{0.5, 0.2}, 3);
  std::vector<ClientState> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(quad_client(i, std::make_shared<QuadraticObjective>(specs[i]), 0.02));
  }
  return out;
}

TEST(RunRound, SameSeedSameRecords) {
  auto run = [](std::size_t workers, std::vector<std::size_t> order) {
    auto clients = hetero_clients(4);
    ServerState server{DenseVector(5, 1.0), 0, 7};
    RoundOptions opt;
    opt.local.H = 8;
    opt.workers = workers;
    opt.execution_order = order;
    std::vector<std::vector<double>> losses;
    for (int t = 0; t < 5; ++t) losses.push_back(run_round(server, clients, opt).train_loss);
    return std::make_pair(server.global, losses);
  };
  const auto a = run(1, {});
  const auto b = run(1, {});
  const auto c = run(3, {3, 1, 0, 2});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

class FixedRates final : public LrStrategy {
 public:
  std::vector<double> rates(const std::vector<ClientState>& clients, const ServerState&) override {
    return std::vector<double>(clients.size(), 0.0125);
  }
};

TEST(RunRound, StrategyRatesAreApplied) {
  auto clients = hetero_clients(3);
  ServerState server{DenseVector(5), 0, 1};
  RoundOptions opt;
  opt.local.H = 2;
  FixedRates rates;
  const auto rec = run_round(server, clients, opt, &rates);
  for (double e : rec.eta) EXPECT_EQ(e, 0.0125);
  EXPECT_EQ(rec.bytes_up, 3u * 5u * 8u);
  EXPECT_EQ(rec.bytes_down, rec.bytes_up);
}

class Exploding final : public Objective {
 public:
  ObjectiveKind kind() const noexcept override { return ObjectiveKind::kQuadratic; }
  std::size_t dim() const noexcept override { return 5; }
  std::size_t sample_count() const noexcept override { return 1; }
  double loss(std::span<const double>, const Batch&) const override { return std::nan(""); }
  DenseVector gradient(std::span<const double>, const Batch&) const override { return DenseVector(5); }
};

TEST(RunRound, PartialFailureAggregatesSuccesses) {
  auto clients = hetero_clients(3);
  clients[1].objective = std::make_shared<Exploding>();
  ServerState server{DenseVector(5, 1.0), 0, 1};
  RoundOptions opt;
  opt.local.H = 3;
  const auto rec = run_round(server, clients, opt);
  EXPECT_EQ(rec.failures, 1u);
  EXPECT_TRUE(rec.failed[1]);
  EXPECT_FALSE(rec.failed[0]);
  EXPECT_TRUE(server.global.all_finite());
}

TEST(RunRound, AllFailedIsAnError) {
  auto clients = hetero_clients(2);
  for (auto& c : clients) c.objective = std::make_shared<Exploding>();
  ServerState server{DenseVector(5, 1.0), 0, 1};
  try {
    run_round(server, clients, RoundOptions{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRoundFailed);
  }
}

TEST(Comm, PaperArithmetic) {
  EXPECT_EQ(comm_cost(42598400, 2), 85196800u);
  EXPECT_DOUBLE_EQ(to_mib(85196800), 81.25);
  EXPECT_EQ(format_bytes(85196800), "81.25 MiB");
  EXPECT_EQ(comm_cost(0, 2), 0u);
  const auto count = back_derive_param_count(6.39, 2);
  EXPECT_EQ(format_bytes(comm_cost(count, 2)), "6.39 GiB");
}

TEST(Comm, LedgerAccumulates) {
  CommLedger ledger(100, 4);
  EXPECT_EQ(ledger.record_round(3), 1200u);
  ledger.record_round(3);
  EXPECT_EQ(ledger.cumulative(), 2u * 2u * 1200u);
  EXPECT_EQ(ledger.rounds(), 2u);
}

std::vector<ObjectiveHandle> as_handles(const std::vector<QuadraticSpec>& specs) {
  std::vector<ObjectiveHandle> out;
  for (const auto& s : specs) out.push_back(std::make_shared<QuadraticObjective>(s));
  return out;
}

TEST(Heterogeneity, IdenticalClientsGiveZero) {
  const auto clients = as_handles(make_client_quadratics(4, 6, Heterogeneity{0.0, 0.0}, 2));
  const auto fit = estimate_heterogeneity_constants(clients, ProbeOptions{});
  EXPECT_LE(fit.c_h, 1e-10);
  EXPECT_LE(fit.sigma_h_sq, 1e-10);
}

TEST(Heterogeneity, PureShiftsMatchClosedForm) {
  const auto a = DenseMatrix::diagonal(std::vector<double>{0.5, 1.0, 1.5, 2.0});
  QuadraticSpec base{a, DenseVector(4), 0.0, {}};
  const auto specs = make_client_quadratics(5, base, Heterogeneity{0.7, 0.0}, 4);
  // grad f_i - grad f = -A (theta*_i - mean theta*), independent of theta.
  DenseVector mean(4);
  for (const auto& s : specs) mean += s.optimum;
  mean *= 1.0 / 5.0;
  double closed = 0.0;
  for (const auto& s : specs) {
    DenseVector d = s.optimum;
    d -= mean;
    closed += a.multiply(d).squared_norm();
  }
  closed /= 5.0;
  const auto fit = estimate_heterogeneity_constants(as_handles(specs), ProbeOptions{});
  EXPECT_LE(fit.c_h, 1e-6);
  EXPECT_NEAR(fit.sigma_h_sq, closed, 0.01 * closed);
}

TEST(Heterogeneity, CurvatureSpreadGivesPositiveCh) {
  QuadraticSpec base{DenseMatrix::identity(4), DenseVector(4), 0.0, {}};
  const auto specs = make_client_quadratics(6, base, Heterogeneity{0.0, 0.5}, 8);
  const auto fit = estimate_heterogeneity_constants(as_handles(specs), ProbeOptions{});
  EXPECT_GT(fit.c_h, 0.0);
}

TEST(Heterogeneity, DegenerateDesign) {
  EXPECT_THROW(clamped_line_fit({0.0, 0.0, 0.0}, {1.0, 2.0, 3.0}, 0.0), Error);
  const auto fit = clamped_line_fit({1.0, 2.0, 3.0}, {3.0, 2.0, 1.0}, 0.0);
  EXPECT_EQ(fit.slope, 0.0);
  EXPECT_NEAR(fit.intercept, 2.0, 1e-12);
}

TEST(LossHistory, WindowMean) {
  LossHistory h(5);
  for (double v : {1.0, 2.0, 3.0, 4.0, 5.0, 6.0}) h.push(v);
  EXPECT_EQ(h.size(), 5u);
  EXPECT_EQ(h.last(), 6.0);
  EXPECT_DOUBLE_EQ(h.mean_last(5), 4.0);
  EXPECT_DOUBLE_EQ(h.mean_last(2), 5.5);
}

}  // namespace
}  // namespace fedmezo
