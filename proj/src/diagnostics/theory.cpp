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

#include "fedmezo/diagnostics/theory.hpp"

#include <algorithm>
#include <cmath>

#include "fedmezo/core/error.hpp"

namespace fedmezo {

GammaZeta gamma_zeta(double d, double r, double n) {
  if (!(d >= 2.0) || !(r >= 1.0) || !(n >= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gamma_zeta needs d >= 2, r >= 1, n >= 1");
  }
  const double core = d * r + d - 2.0;
  if (!(core > 0.0)) throw Error(ErrorCode::kInvalidArgument, "dr + d - 2 must be > 0");
  GammaZeta out;
  out.gamma = core / (n * (d + 2.0));
  out.zeta = (d + 2.0) * n * n / (core * (d + n - 1.0));
  return out;
}

LrBound lr_bound_detail(double H, double L, double c_g, double d, double N) {
  if (!(H > 0.0) || !(L > 0.0) || !(c_g > 0.0) || !(d > 0.0) || !(N > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "lr_bound inputs must be positive");
  }
  LrBound b;
  b.dimension_branch = 1.0 / (3.0 * H * L * std::sqrt(c_g * d));
  b.client_branch = N / (3.0 * H * L * c_g);
  b.step_branch = 1.0 / (H * H);
  b.value = b.dimension_branch;
  b.active = 0;
  if (b.client_branch < b.value) {
    b.value = b.client_branch;
    b.active = 1;
  }
  if (b.step_branch < b.value) {
    b.value = b.step_branch;
    b.active = 2;
  }
  return b;
}

double lr_bound(double H, double L, double c_g, double d, double N) {
  return lr_bound_detail(H, L, c_g, d, N).value;
}

void TheoryInputs::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
  };
  need(d >= 2.0, "d must be >= 2");
  need(r >= 1.0, "r must be >= 1");
  need(n >= 1.0 && N >= 1.0 && H >= 1.0 && T >= 1.0, "n, N, H, T must be >= 1");
  need(L > 0.0, "L must be > 0");
  need(c_g >= 1.0, "c_g must be >= 1");
  need(sigma_g >= 0.0 && sigma_h >= 0.0 && c_h >= 0.0, "sigma_g, sigma_h, c_h must be >= 0");
  need(mu >= 0.0, "mu must be >= 0");
  need(f0 >= f_star, "f0 must be >= f*");
}

TheoryConstants theory_constants(const TheoryInputs& in) {
  in.validate();
  const GammaZeta gz = gamma_zeta(in.d, in.r, in.n);
  TheoryConstants c;
  c.gamma = gz.gamma;
  c.zeta = gz.zeta;
  c.Gamma = (in.d - c.zeta * c.gamma) / (in.d * c.gamma);
  c.Gamma_tilde = (in.d - in.N * c.gamma * c.zeta) / (in.d * c.gamma * in.N);
  c.c_h_tilde = in.c_h + in.N;
  c.sigma_tilde_sq = 3.0 * in.c_g * in.sigma_h * in.sigma_h + in.sigma_g * in.sigma_g;
  c.Gamma_simplified = 1.0 / c.gamma;
  c.Gamma_tilde_simplified = 1.0 / (c.gamma * in.N);
  return c;
}

double iid_rate_bound(const TheoryInputs& in, double eta) {
  if (!(eta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eta must be > 0");
  const TheoryConstants c = theory_constants(in);
  if (!(c.Gamma > 0.0)) throw Error(ErrorCode::kInvalidRegime, "Gamma <= 0");
  const double G = c.Gamma;
  return (in.f0 - in.f_star) / (2.0 * eta * in.T * G) +
         in.sigma_g * in.sigma_g * c.zeta * in.L / (in.N * in.H * in.d * G) +
         c.zeta * in.mu * in.mu * std::pow(in.L, 3) / (4.0 * in.N * in.H * G);
}

double noniid_rate_bound(const TheoryInputs& in, double eta) {
  if (!(eta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eta must be > 0");
  const TheoryConstants c = theory_constants(in);
  if (!(c.Gamma_tilde > 0.0)) throw Error(ErrorCode::kInvalidRegime, "Gamma_tilde <= 0");
  const double Gc = c.Gamma_tilde * c.c_h_tilde;
  return (in.f0 - in.f_star) / (2.0 * Gc * eta * in.T) +
         c.sigma_tilde_sq * c.zeta * in.L / (Gc * in.N * in.H * in.d) +
         c.zeta * in.mu * in.mu * std::pow(in.L, 3) / (4.0 * Gc * in.N * in.H) -
         in.sigma_h * in.sigma_h / (Gc * c.gamma * in.N);
}

double rate_scaling(double r, double N, double H, double T, std::optional<double> c_h_tilde) {
  if (!(r > 0.0) || !(N > 0.0) || !(H > 0.0) || !(T > 0.0) || (c_h_tilde && !(*c_h_tilde > 0.0))) {
    throw Error(ErrorCode::kInvalidArgument, "rate_scaling inputs must be positive");
  }
  const double denom = (c_h_tilde ? *c_h_tilde : 1.0) * N * H * T;
  return std::pow(r, 1.5) / std::sqrt(denom);
}

nlohmann::json theory_report(const TheoryInputs& in, double eta) {
  const TheoryConstants c = theory_constants(in);
  const LrBound b = lr_bound_detail(in.H, in.L, in.c_g, in.d, in.N);
  nlohmann::json j;
  j["inputs"] = {{"d", in.d},     {"r", in.r},         {"n", in.n},     {"N", in.N},
                 {"H", in.H},     {"T", in.T},         {"L", in.L},     {"c_g", in.c_g},
                 {"sigma_g", in.sigma_g}, {"c_h", in.c_h}, {"sigma_h", in.sigma_h},
                 {"mu", in.mu},   {"f0", in.f0},       {"f_star", in.f_star}};
  j["constants"] = {{"gamma", c.gamma},
                    {"zeta", c.zeta},
                    {"Gamma", c.Gamma},
                    {"Gamma_tilde", c.Gamma_tilde},
                    {"c_h_tilde", c.c_h_tilde},
                    {"sigma_tilde_sq", c.sigma_tilde_sq},
                    {"Gamma_simplified", c.Gamma_simplified},
                    {"Gamma_tilde_simplified", c.Gamma_tilde_simplified}};
  static const char* kBranches[] = {"dimension", "clients", "steps"};
  j["lr_bound"] = {{"value", b.value},
                   {"dimension_branch", b.dimension_branch},
                   {"client_branch", b.client_branch},
                   {"step_branch", b.step_branch},
                   {"active", kBranches[b.active]}};
  j["eta"] = eta;
  j["eta_within_bound"] = eta <= b.value;
  j["iid_rate_bound"] = c.Gamma > 0.0 ? nlohmann::json(iid_rate_bound(in, eta)) : nlohmann::json();
  j["noniid_rate_bound"] =
      c.Gamma_tilde > 0.0 ? nlohmann::json(noniid_rate_bound(in, eta)) : nlohmann::json();
  j["rate_scaling_iid"] = rate_scaling(in.r, in.N, in.H, in.T);
  j["rate_scaling_noniid"] = rate_scaling(in.r, in.N, in.H, in.T, c.c_h_tilde);
  return j;
}

}  // namespace fedmezo
