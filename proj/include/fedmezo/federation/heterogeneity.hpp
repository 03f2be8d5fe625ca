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
#include <optional>
#include <vector>

#include "fedmezo/core/dense.hpp"
#include "fedmezo/objectives/objective.hpp"

namespace fedmezo {

struct HeterogeneityFit {
  double c_h = 0.0;
  double sigma_h_sq = 0.0;
  std::size_t probes = 0;
};

struct ProbeOptions {
  std::size_t probes = 20;
  double scale = 1.0;                  // probe = center + scale * N(0, I)
  std::optional<DenseVector> center;   // zero when absent
  std::uint64_t seed = 0;
};

// Probe points theta_p shared by the estimators below.
std::vector<DenseVector> probe_points(std::size_t dim, const ProbeOptions& options);

// Least-squares fit of mean_i ||grad f_i - grad f||^2 = c_h ||grad f||^2 + sigma_h^2
// over the probe points, where f is the mean of the client objectives (each
// on its full sample table). A negative slope is clamped to 0 and the
// intercept refit; the intercept is floored at 0.
HeterogeneityFit estimate_heterogeneity_constants(const std::vector<ObjectiveHandle>& clients,
                                                  const ProbeOptions& options);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// y = slope x + intercept with slope >= min_slope (refitting the intercept
// when clamped). Throws kDegenerateRegression when every x is ~0.
LineFit clamped_line_fit(const std::vector<double>& x, const std::vector<double>& y, double min_slope);

}  // namespace fedmezo
