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

#include "fedmezo/federation/heterogeneity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedmezo/core/error.hpp"
#include "fedmezo/core/rng.hpp"

namespace fedmezo {

std::vector<DenseVector> probe_points(std::size_t dim, const ProbeOptions& options) {
  if (options.center && options.center->size() != dim) {
    throw Error(ErrorCode::kInvalidDimension, "probe center has the wrong length");
  }
  std::vector<DenseVector> out;
  out.reserve(options.probes);
  for (std::size_t p = 0; p < options.probes; ++p) {
    SeedStream stream(derive_seed(RngRecipe{options.seed, 0, p, 0x960be}));
    DenseVector theta = sample_gaussian(stream, dim);
    theta *= options.scale;
    if (options.center) theta += *options.center;
    out.push_back(std::move(theta));
  }
  return out;
}

LineFit clamped_line_fit(const std::vector<double>& x, const std::vector<double>& y, double min_slope) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::kDegenerateRegression, "line fit needs >= 2 paired points");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double max_x = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    max_x = std::max(max_x, std::abs(x[k]));
  }
  if (max_x < 1e-300 || sxx <= 1e-12 * max_x * max_x * n) {
    throw Error(ErrorCode::kDegenerateRegression,
                "regressor has no spread (probe gradients are ~0 or identical)");
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (fit.slope < min_slope) {
    fit.slope = min_slope;
    fit.intercept = my - min_slope * mx;
  }
  return fit;
}

HeterogeneityFit estimate_heterogeneity_constants(const std::vector<ObjectiveHandle>& clients,
                                                  const ProbeOptions& options) {
  if (clients.empty()) throw Error(ErrorCode::kInvalidArgument, "need at least one client objective");
  if (options.probes < 20) throw Error(ErrorCode::kInvalidArgument, "need >= 20 probes");
  const std::size_t d = clients.front()->dim();
  std::vector<Batch> full;
  for (const auto& c : clients) {
    if (c->dim() != d) throw Error(ErrorCode::kInvalidDimension, "client objectives differ in dim");
    full.push_back(c->full_batch());
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& theta : probe_points(d, options)) {
    std::vector<DenseVector> grads;
    DenseVector mean(d);
    for (std::size_t i = 0; i < clients.size(); ++i) {
      grads.push_back(clients[i]->gradient(theta, full[i]));
      mean += grads.back();
    }
    mean *= 1.0 / static_cast<double>(clients.size());
    double spread = 0.0;
    for (const auto& g : grads) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += (g[j] - mean[j]) * (g[j] - mean[j]);
      spread += acc;
    }
    xs.push_back(mean.squared_norm());
    ys.push_back(spread / static_cast<double>(clients.size()));
  }
  const LineFit fit = clamped_line_fit(xs, ys, 0.0);
  HeterogeneityFit out;
  out.c_h = fit.slope;
  out.sigma_h_sq = std::max(fit.intercept, 0.0);
  out.probes = options.probes;
  return out;
}

}  // namespace fedmezo
