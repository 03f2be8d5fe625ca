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
#include <memory>
#include <random>

#include "fedmezo/core/error.hpp"
#include "fedmezo/core/rng.hpp"
#include "fedmezo/diagnostics/measure.hpp"
#include "fedmezo/diagnostics/theory.hpp"
#include "fedmezo/objectives/dataset.hpp"
#include "fedmezo/objectives/logreg.hpp"
#include "fedmezo/objectives/quadratic.hpp"
#include "oracles.hpp"

namespace fedmezo {
namespace {

TEST(GammaZeta, WorkedExamples) {
  const auto a = gamma_zeta(10, 2, 1);
  EXPECT_NEAR(a.gamma, 28.0 / 12.0, 1e-15);
  EXPECT_NEAR(a.zeta, 12.0 / 280.0, 1e-16);
  const auto b = gamma_zeta(2, 1, 1);
  EXPECT_DOUBLE_EQ(b.gamma, 0.5);
  EXPECT_DOUBLE_EQ(b.zeta, 1.0);
}

TEST(GammaZeta, ProductIdentityProperty) {
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<int> dd(2, 100000);
  std::uniform_int_distribution<int> rr(1, 512);
  std::uniform_int_distribution<int> nn(1, 16);
  for (int k = 0; k < 2000; ++k) {
    const double d = dd(gen);
    const double r = rr(gen);
    const double n = nn(gen);
    const auto gz = gamma_zeta(d, r, n);
    EXPECT_NEAR(gz.gamma * gz.zeta, n / (d + n - 1.0), 1e-12 * n / (d + n - 1.0));
  }
}

TEST(GammaZeta, DegenerateRejected) {
  EXPECT_THROW(gamma_zeta(1, 0.5, 1), Error);
  EXPECT_THROW(gamma_zeta(10, 2, 0), Error);
}

TEST(LrBound, WorkedExample) {
  const auto b = lr_bound_detail(30, 1, 1, 100, 4);
  EXPECT_NEAR(b.value, 1.0 / 900.0, 1e-18);
  EXPECT_NEAR(b.client_branch, 4.0 / 90.0, 1e-16);
}

TEST(LrBound, MonotoneInDAndH) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int k = 0; k < 1000; ++k) {
    const double H = std::ceil(u(gen) * 5);
    const double L = u(gen);
    const double cg = 1.0 + u(gen);
    const double d = std::ceil(u(gen) * 100);
    const double N = std::ceil(u(gen));
    EXPECT_LE(lr_bound(H, L, cg, d * 2, N), lr_bound(H, L, cg, d, N));
    EXPECT_LE(lr_bound(H + 1, L, cg, d, N), lr_bound(H, L, cg, d, N));
  }
}

TEST(LrBound, TracksInverseSqrtD) {
  // With 3 H L = 1 the first branch is exactly 1/sqrt(c_g d).
  for (double d : {100.0, 1e4, 1e6}) {
    const auto b = lr_bound_detail(1.0, 1.0 / 3.0, 1.0, d, 1e9);
    EXPECT_NEAR(b.dimension_branch * std::sqrt(d), 1.0, 1e-12);
  }
}

TheoryInputs base_inputs() {
  TheoryInputs in;
  in.d = 100;
  in.r = 4;
  in.n = 1;
  in.N = 4;
  in.H = 30;
  in.T = 500;
  in.L = 1;
  in.c_g = 1;
  in.sigma_g = 0.1;
  in.mu = 1e-3;
  in.f0 = 1;
  in.f_star = 0;
  return in;
}

TEST(IidRate, DoublingTHalvesFirstTerm) {
  auto in = base_inputs();
  const double eta = 1e-3;
  const double a = iid_rate_bound(in, eta);
  in.T *= 2;
  const double b = iid_rate_bound(in, eta);
  in.T = 1e18;
  const double floor = iid_rate_bound(in, eta);
  EXPECT_NEAR(a - floor, 2.0 * (b - floor), 1e-9 * a);
  EXPECT_GT(floor, 0.0);
}

TEST(IidRate, GammaPositiveForValidInputs) {
  // gamma zeta = n / (d + n - 1) < 1 <= d, so the i.i.d. regime is always valid.
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> dd(2, 5000);
  for (int k = 0; k < 500; ++k) {
    auto in = base_inputs();
    in.d = dd(gen);
    in.n = 1 + k % 7;
    EXPECT_GT(theory_constants(in).Gamma, 0.0);
  }
}

TEST(NonIidRate, InvalidRegimeForManyClients) {
  auto in = base_inputs();
  in.d = 2;
  in.r = 1;
  in.N = 5;  // N gamma zeta = 5/2 > d
  EXPECT_LE(theory_constants(in).Gamma_tilde, 0.0);
  try {
    noniid_rate_bound(in, 1e-3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidRegime);
  }
}

TEST(NonIidRate, SigmaHLowersBound) {
  auto in = base_inputs();
  in.c_h = 0.5;
  in.sigma_h = 0.1;
  const double a = noniid_rate_bound(in, 1e-3);
  in.sigma_h = 0.3;
  EXPECT_LT(noniid_rate_bound(in, 1e-3), a);
}

TEST(RateScaling, Exponents) {
  EXPECT_NEAR(rate_scaling(2, 4, 30, 500), std::pow(2.0, 1.5) / std::sqrt(60000.0), 1e-16);
  EXPECT_NEAR(rate_scaling(2, 4, 30, 2000) * 2.0, rate_scaling(2, 4, 30, 500), 1e-15);
  EXPECT_NEAR(rate_scaling(8, 4, 30, 500), 8.0 * rate_scaling(2, 4, 30, 500), 1e-14);
}

TEST(TheoryReport, ContainsBounds) {
  const auto j = theory_report(base_inputs(), 1e-3);
  EXPECT_TRUE(j.contains("iid_rate_bound"));
  EXPECT_TRUE(j.contains("lr_bound"));
  EXPECT_TRUE(j["constants"].contains("gamma"));
}

TEST(EffectiveRank, IdentityAndRankOne) {
  EXPECT_DOUBLE_EQ(effective_rank(DenseMatrix::identity(5)), 5.0);
  EXPECT_DOUBLE_EQ(effective_rank(DenseMatrix::diagonal(std::vector<double>{1.0, 0.0, 0.0})), 1.0);
  EXPECT_THROW(effective_rank(DenseMatrix(3, 3)), Error);
  EXPECT_EQ(rank_for_rates(5.0 + 1e-12), 5u);
  EXPECT_EQ(rank_for_rates(4.2), 5u);
}

TEST(EffectiveRank, MatchesJacobi) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = testing::random_psd(8, seed);
    const auto ev = testing::jacobi_eigenvalues(m);
    double tr = 0.0;
    for (double v : ev) tr += v;
    EXPECT_NEAR(effective_rank(m), tr / ev.back(), 1e-6);
  }
}

TEST(HessianOf, QuadraticExact) {
  const auto a = testing::random_psd(5, 3);
  QuadraticObjective q(QuadraticSpec{a, DenseVector(5), 0.0, {}});
  const auto h = hessian_of(q, DenseVector(5, 0.3));
  EXPECT_EQ(h.max_abs_diff(a), 0.0);
}

TEST(HessianOf, LogRegAtZeroIsQuarterGram) {
  SyntheticSpec spec;
  spec.samples = 200;
  spec.dim = 6;
  spec.seed = 4;
  auto data = std::make_shared<Dataset>(make_synthetic_classification(spec));
  const double l2 = 0.05;
  LogRegObjective lr(data, LogRegSpec{l2});
  const auto h = hessian_of(lr, DenseVector(6));
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      double g = 0.0;
      for (std::size_t s = 0; s < 200; ++s) g += data->row(s)[i] * data->row(s)[j];
      const double expect = 0.25 * g / 200.0 + (i == j ? l2 : 0.0);
      EXPECT_NEAR(h(i, j), expect, 1e-4);
      EXPECT_EQ(h(i, j), h(j, i));
    }
  }
}

TEST(HessianOf, RefusesLargeDimension) {
  SyntheticSpec spec;
  spec.samples = 10;
  spec.dim = 300;
  auto data = std::make_shared<Dataset>(make_synthetic_classification(spec));
  LogRegObjective lr(data, {});
  try {
    hessian_of(lr, DenseVector(300));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionTooLarge);
  }
}

// Exhaustive oracle: E_s ||grad F_s||^2 and ||grad f||^2 at each probe, then
// ordinary least squares.
std::pair<double, double> exhaustive_fit(const QuadraticObjective& q, const std::vector<DenseVector>& probes) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& p : probes) {
    x.push_back(q.gradient(p, q.full_batch()).squared_norm());
    double acc = 0.0;
    for (std::size_t s = 0; s < q.sample_count(); ++s) acc += q.gradient(p, Batch{{s}}).squared_norm();
    y.push_back(acc / static_cast<double>(q.sample_count()));
  }
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

TEST(CgSigma, FullBatchIsNoiseless) {
  QuadraticObjective q(make_target_noise_quadratic(DenseMatrix::identity(4), DenseVector(4), 10, 0.5, 1));
  CgSigmaOptions opt;
  opt.batch_size = 10;
  const auto fit = estimate_cg_sigma(q, opt);
  EXPECT_NEAR(fit.c_g, 1.0, 1e-9);
  EXPECT_LE(fit.sigma_g_sq, 1e-10);
}

TEST(CgSigma, MatchesExhaustiveEnumeration) {
  QuadraticObjective q(make_target_noise_quadratic(DenseMatrix::diagonal(linspace(0.5, 1.5, 6)),
                                                   DenseVector(6), 40, 0.6, 2));
  CgSigmaOptions opt;
  opt.batch_size = 1;
  opt.batches_per_probe = 20000;
  const auto fit = estimate_cg_sigma(q, opt);
  const auto probes = probe_points(6, opt.probes);
  const auto [slope, intercept] = exhaustive_fit(q, probes);
  EXPECT_NEAR(fit.c_g, std::max(slope, 1.0), 0.1 * std::max(slope, 1.0));
  EXPECT_NEAR(fit.sigma_g_sq, intercept, 0.1 * intercept);
}

TEST(CgSigma, SparseBlocksGiveBlockRatio) {
  SeedStream s(3);
  QuadraticObjective q(make_sparse_block_quadratic(linspace(0.8, 1.0, 20), sample_gaussian(s, 20), 4, 2, 5));
  CgSigmaOptions opt;
  opt.exhaustive = true;
  const auto fit = estimate_cg_sigma(q, opt);
  EXPECT_GT(fit.c_g, 3.0);
  EXPECT_LT(fit.c_g, 5.5);
  EXPECT_LT(fit.sigma_g_sq, 1e-6 * fit.c_g);
}

TEST(CgSigma, SmallerBatchesNeverLessNoise) {
  QuadraticObjective q(make_target_noise_quadratic(DenseMatrix::identity(5), DenseVector(5), 30, 0.5, 3));
  double prev = -1.0;
  for (std::size_t b : {16, 4, 1}) {
    CgSigmaOptions opt;
    opt.batch_size = b;
    opt.batches_per_probe = 4000;
    const auto fit = estimate_cg_sigma(q, opt);
    EXPECT_GE(fit.sigma_g_sq, prev);
    prev = fit.sigma_g_sq;
  }
}

TEST(Smoothness, QuadraticTopEigenvalue) {
  QuadraticObjective q(QuadraticSpec{DenseMatrix::diagonal(linspace(0.2, 3.0, 7)), DenseVector(7), 0.0, {}});
  EXPECT_NEAR(estimate_smoothness(q, DenseVector(7), 500), 3.0, 1e-6);
}

}  // namespace
}  // namespace fedmezo
