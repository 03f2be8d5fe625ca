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
#include <limits>

#include "fedmezo/core/error.hpp"
#include "fedmezo/core/rng.hpp"
#include "fedmezo/objectives/quadratic.hpp"
#include "fedmezo/zoo/zoo.hpp"

namespace fedmezo {
namespace {

QuadraticObjective identity2() {
  return QuadraticObjective(QuadraticSpec{DenseMatrix::identity(2), DenseVector(2), 0.0, {}});
}

// Loss that overflows once any coordinate exceeds a threshold.
class CliffObjective final : public Objective {
 public:
  ObjectiveKind kind() const noexcept override { return ObjectiveKind::kQuadratic; }
  std::size_t dim() const noexcept override { return 3; }
  std::size_t sample_count() const noexcept override { return 1; }
  double loss(std::span<const double> p, const Batch&) const override {
    for (double v : p) {
      if (v > 1.0) return std::numeric_limits<double>::infinity();
    }
    return squared_norm(p);
  }
  DenseVector gradient(std::span<const double> p, const Batch&) const override {
    DenseVector g = DenseVector::from(p);
    g *= 2.0;
    return g;
  }
};

TEST(TwoPoint, ArithmeticExample) {
  const auto q = identity2();
  const DenseVector theta{1.0, 0.0};
  const DenseVector z{1.0, 1.0};
  const auto e = two_point_estimate(q, theta, q.full_batch(), ZooConfig{0.1, 1}, 0, z.span());
  EXPECT_NEAR(e.loss_plus, 0.61, 1e-15);
  EXPECT_NEAR(e.loss_minus, 0.41, 1e-15);
  EXPECT_NEAR(e.g, 1.0, 1e-14);
  EXPECT_NEAR(e.e[0], 1.0, 1e-14);
  EXPECT_NEAR(e.e[1], 1.0, 1e-14);
}

TEST(TwoPoint, ZeroAtOptimumOfEvenQuadratic) {
  SeedStream s(2);
  const auto opt = sample_gaussian(s, 5);
  QuadraticObjective q(QuadraticSpec{DenseMatrix::identity(5), opt, 0.0, {}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto e = two_point_estimate(q, opt, q.full_batch(), ZooConfig{}, seed);
    EXPECT_NEAR(e.g, 0.0, 1e-9);
    EXPECT_LT(e.e.norm(), 1e-8);
  }
}

TEST(TwoPoint, MonteCarloMeanMatchesGradient) {
  SeedStream s(3);
  QuadraticObjective q(QuadraticSpec{DenseMatrix::diagonal(linspace(0.5, 2.0, 10)), DenseVector(10), 0.0, {}});
  const auto theta = sample_gaussian(s, 10);
  const auto grad = q.gradient(theta, q.full_batch());
  DenseVector mean(10);
  const std::size_t K = 200000;
  for (std::size_t k = 0; k < K; ++k) {
    mean += two_point_estimate(q, theta, q.full_batch(), ZooConfig{}, derive_seed(RngRecipe{1, 0, 0, k})).e;
  }
  mean *= 1.0 / K;
  DenseVector diff = mean;
  diff -= grad;
  EXPECT_LE(diff.norm() / grad.norm(), 0.02);
}

TEST(TwoPoint, OverflowCarriesNorm) {
  CliffObjective c;
  const DenseVector theta{0.999, 0.0, 0.0};
  try {
    two_point_estimate(c, theta, c.full_batch(), ZooConfig{0.5, 1}, 1, DenseVector{1.0, 0.0, 0.0}.span());
    FAIL();
  } catch (const NumericalOverflowError& e) {
    EXPECT_NEAR(e.params_norm(), 1.499, 1e-12);
  }
}

TEST(OnePoint, ArithmeticExample) {
  const auto q = identity2();
  const DenseVector theta{1.0, 0.0};
  const DenseVector z{1.0, 1.0};
  const auto e = one_point_estimate(q, theta, q.full_batch(), ZooConfig{0.1, 1}, 0, z.span());
  EXPECT_NEAR(e.g, 0.55, 1e-14);
  EXPECT_NEAR(e.e[0], 0.55, 1e-14);
  EXPECT_NEAR(e.e[1], 0.55, 1e-14);
}

TEST(OnePoint, BiasedAtOptimum) {
  QuadraticObjective q(QuadraticSpec{DenseMatrix::identity(3), DenseVector(3), 0.0, {}});
  const auto e = one_point_estimate(q, DenseVector(3), q.full_batch(), ZooConfig{0.1, 1}, 5);
  EXPECT_GT(e.e.norm(), 0.0);
}

TEST(OnePoint, MonteCarloMeanIsHalfGradient) {
  SeedStream s(4);
  QuadraticObjective q(QuadraticSpec{DenseMatrix::identity(10), DenseVector(10), 0.0, {}});
  auto theta = sample_gaussian(s, 10);
  theta *= 5.0 / theta.norm();
  const auto grad = q.gradient(theta, q.full_batch());
  DenseVector mean(10);
  const std::size_t K = 200000;
  for (std::size_t k = 0; k < K; ++k) {
    mean += one_point_estimate(q, theta, q.full_batch(), ZooConfig{}, derive_seed(RngRecipe{2, 0, 0, k})).e;
  }
  mean *= 1.0 / K;
  DenseVector diff = mean;
  diff.axpy(-0.5, grad);
  EXPECT_LE(diff.norm() / (0.5 * grad.norm()), 0.03);
}

TEST(MezoStep, ArithmeticExample) {
  const auto q = identity2();
  DenseVector theta{1.0, 0.0};
  const DenseVector z{1.0, 1.0};
  const auto out = mezo_step_inplace(q, theta.span(), q.full_batch(), ZooConfig{0.1, 1}, 0.1, 0,
                                     RestoreMode::kInPlace, z.span());
  EXPECT_NEAR(out.g, 1.0, 1e-14);
  EXPECT_NEAR(theta[0], 0.9, 1e-14);
  EXPECT_NEAR(theta[1], -0.1, 1e-14);
}

TEST(MezoStep, InPlaceMatchesSnapshotWithoutAllocating) {
  SeedStream s(5);
  QuadraticObjective q(QuadraticSpec{DenseMatrix::diagonal(linspace(0.5, 2.0, 30)), DenseVector(30), 0.0, {}});
  DenseVector a = sample_gaussian(s, 30);
  DenseVector b = a;
  const auto batch = q.full_batch();
  const auto before = DenseVector::allocation_count();
  for (std::size_t k = 0; k < 2000; ++k) {
    mezo_step_inplace(q, a.span(), batch, ZooConfig{}, 0.01, derive_seed(RngRecipe{5, 0, 0, k}));
  }
  EXPECT_EQ(DenseVector::allocation_count(), before);
  for (std::size_t k = 0; k < 2000; ++k) {
    mezo_step_inplace(q, b.span(), batch, ZooConfig{}, 0.01, derive_seed(RngRecipe{5, 0, 0, k}),
                      RestoreMode::kSnapshot);
  }
  for (std::size_t i = 0; i < 30; ++i) EXPECT_LE(std::abs(a[i] - b[i]), 1e-9 * std::abs(b[i]));
}

TEST(MezoStep, ZeroRateOnlyDrifts) {
  SeedStream s(6);
  QuadraticObjective q(QuadraticSpec{DenseMatrix::identity(20), DenseVector(20), 0.0, {}});
  const auto orig = sample_gaussian(s, 20);
  DenseVector theta = orig;
  const std::uint64_t seed = 77;
  mezo_step_inplace(q, theta.span(), q.full_batch(), ZooConfig{}, 0.0, seed);
  GaussianStream z(seed);
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t i = 0; i < 20; ++i) {
    const double bound = 8.0 * eps * (std::abs(orig[i]) + 1e-3 * std::abs(z.next()));
    EXPECT_LE(std::abs(theta[i] - orig[i]), bound);
  }
}

TEST(MezoStep, NonFiniteLossRestoresParams) {
  CliffObjective c;
  DenseVector theta{0.95, 0.1, -0.2};
  const DenseVector orig = theta;
  const DenseVector z{1.0, 0.0, 0.0};
  EXPECT_THROW(mezo_step_inplace(c, theta.span(), c.full_batch(), ZooConfig{0.1, 1}, 0.1, 0,
                                 RestoreMode::kInPlace, z.span()),
               NumericalOverflowError);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(theta[i], orig[i], 1e-15);
}

TEST(MezoStep, NegativeRateRejected) {
  const auto q = identity2();
  DenseVector theta{1.0, 0.0};
  EXPECT_THROW(mezo_step_inplace(q, theta.span(), q.full_batch(), ZooConfig{}, -1.0, 0), Error);
}

TEST(SecondMoment, GaussianIdentity) {
  SeedStream s(7);
  QuadraticObjective q(QuadraticSpec{DenseMatrix::identity(10), DenseVector(10), 0.0, {}});
  auto theta = sample_gaussian(s, 10);
  theta *= 5.0 / theta.norm();
  const auto m = estimator_second_moment(q, theta, q.full_batch(), ZooConfig{}, 1000000, 3);
  EXPECT_NEAR(m.grad_sq_norm, 25.0, 1e-9);
  EXPECT_NEAR(m.value, 300.0, 15.0);
  EXPECT_EQ(m.gaussian_ratio, 12.0);
  EXPECT_EQ(m.stated_ratio, 10.0);
}

TEST(SecondMoment, VanishesAtOptimum) {
  QuadraticObjective q(QuadraticSpec{DenseMatrix::identity(10), DenseVector(10), 0.0, {}});
  const auto m = estimator_second_moment(q, DenseVector(10), q.full_batch(), ZooConfig{}, 1000, 3);
  EXPECT_LT(m.value, 1e-12);
}

TEST(SecondMoment, QuadraticInGradientScale) {
  QuadraticObjective q(QuadraticSpec{DenseMatrix::identity(10), DenseVector(10), 0.0, {}});
  SeedStream s(8);
  auto theta = sample_gaussian(s, 10);
  const auto m1 = estimator_second_moment(q, theta, q.full_batch(), ZooConfig{}, 100000, 4);
  theta *= 2.0;
  const auto m2 = estimator_second_moment(q, theta, q.full_batch(), ZooConfig{}, 100000, 4);
  EXPECT_NEAR(m2.value / m1.value, 4.0, 0.4);
}

TEST(SecondMoment, TooFewSamplesRejected) {
  const auto q = identity2();
  EXPECT_THROW(estimator_second_moment(q, DenseVector(2), q.full_batch(), ZooConfig{}, 999, 1), Error);
}

TEST(MultiPerturbation, AveragesDirections) {
  const auto q = identity2();
  const DenseVector theta{1.0, 2.0};
  const auto e = two_point_estimate(q, theta, q.full_batch(), ZooConfig{1e-3, 4}, 9);
  DenseVector manual(2);
  for (std::size_t j = 0; j < 4; ++j) {
    manual += two_point_estimate(q, theta, q.full_batch(), ZooConfig{1e-3, 1}, perturbation_seed(9, j)).e;
  }
  manual *= 0.25;
  EXPECT_NEAR(e.e[0], manual[0], 1e-12);
  EXPECT_NEAR(e.e[1], manual[1], 1e-12);
}

}  // namespace
}  // namespace fedmezo
