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

#include <cmath>
#include <filesystem>
#include <memory>

#include "fedmezo/core/error.hpp"
#include "fedmezo/core/rng.hpp"
#include "fedmezo/core/spectral.hpp"
#include "fedmezo/objectives/dataset.hpp"
#include "fedmezo/objectives/logreg.hpp"
#include "fedmezo/objectives/mlp_lora.hpp"
#include "fedmezo/objectives/quadratic.hpp"
#include "oracles.hpp"

namespace fedmezo {
namespace {

QuadraticObjective identity_quadratic(std::size_t d, double offset = 0.0) {
  return QuadraticObjective(QuadraticSpec{DenseMatrix::identity(d), DenseVector(d), offset, {}});
}

double fd_rel_error(const Objective& obj, const DenseVector& theta, const Batch& b) {
  const auto g = obj.gradient(theta, b);
  const auto fd = finite_difference_grad(obj, theta, b, 1e-5);
  DenseVector diff = g;
  diff -= fd;
  return diff.norm() / std::max(g.norm(), 1e-8);
}

TEST(Quadratic, MinimumIsOffset) {
  SeedStream s(1);
  const auto a = testing::random_psd(5, 2);
  const auto opt = sample_gaussian(s, 5);
  QuadraticObjective q(QuadraticSpec{a, opt, 1.75, {}});
  EXPECT_DOUBLE_EQ(q.loss(opt, q.full_batch()), 1.75);
  EXPECT_DOUBLE_EQ(q.min_value(), 1.75);
}

TEST(Quadratic, ArithmeticExample) {
  const auto q = identity_quadratic(2);
  const DenseVector theta{3.0, 4.0};
  EXPECT_DOUBLE_EQ(q.loss(theta, q.full_batch()), 12.5);
  EXPECT_EQ(q.gradient(theta, q.full_batch()), (DenseVector{3.0, 4.0}));
}

TEST(Quadratic, DimensionMismatchRejected) {
  const auto q = identity_quadratic(3);
  try {
    eval_loss(q, DenseVector{1.0, 2.0}, q.full_batch());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(Quadratic, NonPsdCurvatureRejected) {
  const auto bad = DenseMatrix::from_rows({{1.0, 2.0}, {2.0, 1.0}});
  EXPECT_THROW(QuadraticObjective(QuadraticSpec{bad, DenseVector(2), 0.0, {}}), Error);
}

TEST(Quadratic, SparseBlockTableMeansToDense) {
  const auto spectrum = linspace(0.8, 1.0, 10);
  SeedStream s(3);
  const auto opt = sample_gaussian(s, 10);
  QuadraticObjective sparse(make_sparse_block_quadratic(spectrum, opt, 2, 3, 9));
  QuadraticObjective dense(QuadraticSpec{DenseMatrix::diagonal(spectrum), opt, 0.0, {}});
  EXPECT_EQ(sparse.sample_count(), 15u);
  for (int p = 0; p < 20; ++p) {
    const auto theta = sample_gaussian(s, 10);
    EXPECT_NEAR(sparse.loss(theta, sparse.full_batch()), dense.loss(theta, dense.full_batch()), 1e-10);
  }
  EXPECT_LT(sparse.global_curvature().max_abs_diff(DenseMatrix::diagonal(spectrum)), 1e-12);
  EXPECT_NEAR(sparse.smoothness(), 1.0, 1e-9);
}

TEST(Quadratic, TargetNoiseOptimumSolvesNormalEquations) {
  SeedStream s(4);
  const auto a = testing::random_psd(4, 8);
  DenseMatrix a2 = a;
  for (std::size_t i = 0; i < 4; ++i) a2(i, i) += 0.3;
  QuadraticObjective q(make_target_noise_quadratic(a2, sample_gaussian(s, 4), 12, 0.5, 7));
  const auto g = q.gradient(q.global_optimum(), q.full_batch());
  EXPECT_LT(g.norm(), 1e-10);
  EXPECT_NEAR(q.loss(q.global_optimum(), q.full_batch()), q.min_value(), 1e-14);
}

TEST(Quadratic, FiniteDifferenceAgreementOver100Probes) {
  SeedStream s(5);
  const auto a = testing::random_psd(6, 1);
  QuadraticObjective q(make_target_noise_quadratic(a, sample_gaussian(s, 6), 5, 0.3, 2));
  for (int p = 0; p < 100; ++p) {
    const auto theta = sample_gaussian(s, 6);
    Batch b{{static_cast<std::size_t>(p % 5), static_cast<std::size_t>((p * 3) % 5)}};
    EXPECT_LE(fd_rel_error(q, theta, b), 1e-5);
  }
}

TEST(ClientQuadratics, IidLimitIsIdentical) {
  const auto specs = make_client_quadratics(3, 4, Heterogeneity{0.0, 0.0}, 11);
  for (const auto& s : specs) {
    EXPECT_EQ(s.optimum, specs[0].optimum);
    EXPECT_EQ(s.curvature.max_abs_diff(specs[0].curvature), 0.0);
  }
}

TEST(ClientQuadratics, TwoShiftedClientsExample) {
  std::vector<ObjectiveHandle> clients;
  for (double c : {1.0, -1.0}) {
    clients.push_back(std::make_shared<QuadraticObjective>(
        QuadraticSpec{DenseMatrix::identity(1), DenseVector{c}, 0.0, {}}));
  }
  MeanObjective f(clients);
  const auto hess = *f.exact_hessian(DenseVector{0.0}, Batch{{0}});
  const auto opt = solve_spd(hess, -1.0 * f.gradient(DenseVector{0.0}, Batch{{0}}));
  EXPECT_DOUBLE_EQ(opt[0], 0.0);
  // mean of 1/2 (0 - 1)^2 and 1/2 (0 + 1)^2
  EXPECT_DOUBLE_EQ(f.loss(DenseVector{0.0}, Batch{{0}}), 0.5);
}

TEST(ClientQuadratics, NegativeCurvatureRejected) {
  QuadraticSpec base{DenseMatrix::identity(2), DenseVector(2), 0.0, {}};
  try {
    make_client_quadratics(50, base, Heterogeneity{0.0, 1.5}, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

std::shared_ptr<const Dataset> balanced_binary(std::size_t n, std::size_t d, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.samples = n;
  spec.dim = d;
  spec.classes = 2;
  spec.seed = seed;
  return std::make_shared<Dataset>(make_synthetic_classification(spec));
}

TEST(LogReg, ZeroWeightsGiveLn2) {
  auto data = balanced_binary(40, 5, 1);
  LogRegObjective lr(data, {});
  EXPECT_NEAR(lr.loss(DenseVector(5), lr.full_batch()), std::log(2.0), 1e-15);
}

TEST(LogReg, FiniteDifferenceAgreementOver100Probes) {
  auto data = balanced_binary(60, 6, 2);
  LogRegObjective lr(data, LogRegSpec{0.01});
  SeedStream s(9);
  for (int p = 0; p < 100; ++p) {
    const auto theta = sample_gaussian(s, 6);
    Batch b{{static_cast<std::size_t>(p % 60), static_cast<std::size_t>((7 * p + 1) % 60), 3}};
    EXPECT_LE(fd_rel_error(lr, theta, b), 1e-5);
  }
}

TEST(LogReg, RejectsMulticlass) {
  SyntheticSpec spec;
  spec.classes = 3;
  spec.samples = 30;
  auto data = std::make_shared<Dataset>(make_synthetic_classification(spec));
  EXPECT_THROW(LogRegObjective(data, {}), Error);
}

std::shared_ptr<const Dataset> four_class(std::size_t n, std::size_t d, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.samples = n;
  spec.dim = d;
  spec.classes = 4;
  spec.seed = seed;
  return std::make_shared<Dataset>(make_synthetic_classification(spec));
}

TEST(MlpLora, TrainableCountFormula) {
  const std::vector<std::size_t> dims{20, 10};
  EXPECT_EQ(lora_trainable_count(dims, 4), 120u);
  const auto spec = make_mlp_lora_spec(dims, 4, 8.0, 1);
  EXPECT_EQ(init_lora(spec, 1).size(), 120u);
}

TEST(MlpLora, RankTooLargeRejected) {
  try {
    make_mlp_lora_spec({20, 10}, 11, 8.0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidRank);
  }
  EXPECT_THROW(make_mlp_lora_spec({20, 10}, 0, 8.0, 1), Error);
}

TEST(MlpLora, InitLossEqualsFrozenBase) {
  auto data = four_class(50, 8, 3);
  const auto spec = make_mlp_lora_spec({8, 6, 4}, 2, 4.0, 5);
  MlpLoraObjective m(spec, data);
  const auto init = init_lora(spec, 5);
  const auto b = m.full_batch();
  EXPECT_EQ(m.loss(init, b), m.base_loss(b));
}

TEST(MlpLora, InitIsDeterministic) {
  const auto spec = make_mlp_lora_spec({8, 6, 4}, 2, 4.0, 5);
  EXPECT_EQ(init_lora(spec, 17).values(), init_lora(spec, 17).values());
  EXPECT_NE(init_lora(spec, 17).values(), init_lora(spec, 18).values());
}

TEST(MlpLora, AGradientVanishesWhileBIsZero) {
  auto data = four_class(30, 8, 4);
  const auto spec = make_mlp_lora_spec({8, 6, 4}, 2, 4.0, 6);
  MlpLoraObjective m(spec, data);
  const auto init = init_lora(spec, 6);
  const auto g = m.gradient(init, m.full_batch());
  double b_norm = 0.0;
  for (const auto& slice : m.layout()->slices()) {
    for (std::size_t j = 0; j < slice.length; ++j) {
      const double v = g[slice.offset + j];
      if (slice.role == SliceRole::kAdapterA) {
        EXPECT_EQ(v, 0.0) << slice.name;
      } else {
        b_norm += v * v;
      }
    }
  }
  EXPECT_GT(b_norm, 0.0);
}

TEST(MlpLora, FiniteDifferenceAgreementOver100Probes) {
  auto data = four_class(40, 5, 7);
  const auto spec = make_mlp_lora_spec({5, 4, 4}, 2, 4.0, 8);
  MlpLoraObjective m(spec, data);
  SeedStream s(10);
  for (int p = 0; p < 100; ++p) {
    auto theta = sample_gaussian(s, m.dim());
    theta *= 0.5;
    Batch b{{static_cast<std::size_t>(p % 40), static_cast<std::size_t>((3 * p + 5) % 40)}};
    EXPECT_LE(fd_rel_error(m, theta, b), 1e-5);
  }
}

TEST(MlpLora, FullParametersRestrictToTrainableSlots) {
  auto data = four_class(20, 5, 7);
  const auto spec = make_mlp_lora_spec({5, 4, 4}, 2, 4.0, 8);
  MlpLoraObjective m(spec, data);
  SeedStream s(1);
  const auto theta = sample_gaussian(s, m.dim());
  const auto full = m.full_parameters(theta);
  const auto slots = m.trainable_slots();
  ASSERT_EQ(slots.size(), m.dim());
  for (std::size_t j = 0; j < slots.size(); ++j) EXPECT_EQ(full[slots[j]], theta[j]);
}

TEST(Dataset, CsvRoundTrip) {
  SyntheticSpec spec;
  spec.samples = 25;
  spec.dim = 3;
  spec.tasks = 2;
  const auto ds = make_synthetic_classification(spec);
  const auto path = std::filesystem::temp_directory_path() / "fedmezo_roundtrip.csv";
  save_csv(ds, path);
  const auto back = load_csv(path);
  EXPECT_EQ(back.rows(), ds.rows());
  EXPECT_EQ(back.labels(), ds.labels());
  EXPECT_EQ(back.task_tags(), ds.task_tags());
  EXPECT_EQ(back.features().max_abs_diff(ds.features()), 0.0);
  std::filesystem::remove(path);
}

TEST(Dataset, HoldoutIsDisjointCover) {
  const auto [train, eval] = holdout_split(100, 0.1, 3);
  EXPECT_EQ(eval.size(), 10u);
  std::vector<int> seen(100, 0);
  for (auto r : train) ++seen[r];
  for (auto r : eval) ++seen[r];
  for (int c : seen) EXPECT_EQ(c, 1);
}

}  // namespace
}  // namespace fedmezo
