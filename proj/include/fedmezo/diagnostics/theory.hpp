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

#include <optional>

#include "json.hpp"

namespace fedmezo {

struct GammaZeta {
  double gamma = 0.0;
  double zeta = 0.0;
};

// gamma = (dr + d - 2) / (n (d + 2)),  zeta = (d + 2) n^2 / ((dr + d - 2)(d + n - 1))
GammaZeta gamma_zeta(double d, double r, double n);

struct LrBound {
  double value = 0.0;
  double dimension_branch = 0.0;  // 1 / (3 H L sqrt(c_g d))
  double client_branch = 0.0;     // N / (3 H L c_g)
  double step_branch = 0.0;       // 1 / H^2
  int active = 0;                 // index of the smallest branch
};

LrBound lr_bound_detail(double H, double L, double c_g, double d, double N);
double lr_bound(double H, double L, double c_g, double d, double N);

struct TheoryInputs {
  double d = 2;
  double r = 1;
  double n = 1;
  double N = 1;
  double H = 1;
  double T = 1;
  double L = 1;
  double c_g = 1;
  double sigma_g = 0;
  double c_h = 0;
  double sigma_h = 0;
  double mu = 1e-3;
  double f0 = 1;
  double f_star = 0;

  void validate() const;
};

struct TheoryConstants {
  double gamma = 0.0;
  double zeta = 0.0;
  double Gamma = 0.0;        // (d - zeta gamma) / (d gamma)
  double Gamma_tilde = 0.0;  // (d - N gamma zeta) / (d gamma N)
  double c_h_tilde = 0.0;    // c_h + N
  double sigma_tilde_sq = 0.0;  // 3 c_g sigma_h^2 + sigma_g^2
  // Leading-order forms 1/gamma and 1/(gamma N), for comparison only.
  double Gamma_simplified = 0.0;
  double Gamma_tilde_simplified = 0.0;
};

TheoryConstants theory_constants(const TheoryInputs& in);

// Throws Error(kInvalidRegime) when Gamma <= 0.
double iid_rate_bound(const TheoryInputs& in, double eta);
// Throws Error(kInvalidRegime) when Gamma_tilde <= 0.
double noniid_rate_bound(const TheoryInputs& in, double eta);

// r^{3/2} (N H T)^{-1/2}, or r^{3/2} (c_h_tilde N H T)^{-1/2}.
double rate_scaling(double r, double N, double H, double T,
                    std::optional<double> c_h_tilde = std::nullopt);

// Inputs, constants, ceiling and both bounds (null where the regime is
// invalid) as one JSON object.
nlohmann::json theory_report(const TheoryInputs& in, double eta);

}  // namespace fedmezo
