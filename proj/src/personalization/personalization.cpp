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

#include "fedmezo/personalization/personalization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedmezo/core/error.hpp"
#include "fedmezo/core/rng.hpp"

namespace fedmezo {

const char* to_string(SignalKind kind) {
  switch (kind) {
    case SignalKind::kRoundLoss: return "round-loss";
    case SignalKind::kFiveRoundAvgLoss: return "five-round-loss";
    case SignalKind::kUpdateNormDiff: return "update-norm";
    case SignalKind::kRandomBaseline: return "random";
    case SignalKind::kDisabled: return "disabled";
  }
  return "unknown";
}

SignalKind parse_signal_kind(const std::string& text) {
  for (auto k : {SignalKind::kRoundLoss, SignalKind::kFiveRoundAvgLoss, SignalKind::kUpdateNormDiff,
                 SignalKind::kRandomBaseline, SignalKind::kDisabled}) {
    if (text == to_string(k)) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown personalization signal: " + text);
}

const char* to_string(Normalization norm) {
  return norm == Normalization::kMaxAbs ? "max-abs" : "tanh-zscore";
}

Normalization parse_normalization(const std::string& text) {
  if (text == "max-abs") return Normalization::kMaxAbs;
  if (text == "tanh-zscore") return Normalization::kTanhZScore;
  throw Error(ErrorCode::kInvalidArgument, "unknown normalization: " + text);
}

const char* to_string(LrForm form) {
  return form == LrForm::kAdditive ? "additive" : "multiplicative";
}

LrForm parse_lr_form(const std::string& text) {
  if (text == "additive") return LrForm::kAdditive;
  if (text == "multiplicative") return LrForm::kMultiplicative;
  throw Error(ErrorCode::kInvalidArgument, "unknown lr form: " + text);
}

namespace {

std::vector<double> centred(std::vector<double> v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (double& x : v) x -= mean;
  return v;
}

}  // namespace

RawSignal raw_signal(SignalKind kind, const std::vector<ClientState>& clients) {
  RawSignal out;
  const std::size_t n = clients.size();
  out.values.assign(n, 0.0);
  if (n == 0) return out;
  switch (kind) {
    case SignalKind::kRandomBaseline:
    case SignalKind::kDisabled:
      return out;
    case SignalKind::kRoundLoss:
    case SignalKind::kFiveRoundAvgLoss: {
      const std::size_t window = kind == SignalKind::kRoundLoss ? 1 : 5;
      std::vector<double> v(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (clients[i].history.size() < window) {
          out.warmup = true;
          return out;
        }
        v[i] = clients[i].history.mean_last(window);
      }
      out.values = centred(std::move(v));
      return out;
    }
    case SignalKind::kUpdateNormDiff: {
      const std::size_t d = clients.front().last_update.size();
      for (const auto& c : clients) {
        if (d == 0 || c.last_update.size() != d) {
          out.warmup = true;
          return out;
        }
      }
      std::vector<double> mean(d, 0.0);
      for (const auto& c : clients) {
        for (std::size_t j = 0; j < d; ++j) mean[j] += c.last_update[j];
      }
      for (double& m : mean) m /= static_cast<double>(n);
      std::vector<double> v(n);
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double diff = clients[i].last_update[j] - mean[j];
          acc += diff * diff;
        }
        v[i] = acc;
      }
      out.values = centred(std::move(v));
      return out;
    }
  }
  return out;
}

std::vector<double> normalize_phi(std::span<const double> raw, Normalization norm, double eps) {
  std::vector<double> out(raw.begin(), raw.end());
  if (out.empty()) return out;
  if (norm == Normalization::kMaxAbs) {
    double max_abs = 0.0;
    for (double v : raw) max_abs = std::max(max_abs, std::abs(v));
    // Huge raw values divide to exactly +-1 in double; keep the interval open.
    const double edge = std::nextafter(1.0, 0.0);
    for (double& v : out) v = std::clamp(v / (max_abs + eps), -edge, edge);
    return out;
  }
  const double n = static_cast<double>(out.size());
  const double mean = std::accumulate(out.begin(), out.end(), 0.0) / n;
  double var = 0.0;
  for (double v : out) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  for (double& v : out) v = std::tanh((v - mean) / (sd + eps));
  // tanh saturates to exactly +-1 in double for large arguments.
  for (double& v : out) v = std::clamp(v, -1.0 + 1e-15, 1.0 - 1e-15);
  return out;
}

double LrPolicy::lower() const {
  if (eta_min) return *eta_min;
  const double band = form == LrForm::kAdditive ? eta0 - std::abs(alpha) : eta0 * (1.0 - std::abs(alpha));
  return std::max(band, 1e-3 * eta0);
}

double LrPolicy::upper() const {
  if (eta_max) return *eta_max;
  return form == LrForm::kAdditive ? eta0 + std::abs(alpha) : eta0 * (1.0 + std::abs(alpha));
}

void LrPolicy::validate() const {
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw Error(ErrorCode::kInvalidArgument, "eta0 must be > 0");
  if (!std::isfinite(alpha)) throw Error(ErrorCode::kInvalidArgument, "alpha must be finite");
  const double lo = lower();
  const double hi = upper();
  if (!(lo > 0.0) || !(lo <= eta0) || !(eta0 <= hi)) {
    throw Error(ErrorCode::kInvalidArgument, "clamp must satisfy 0 < eta_min <= eta0 <= eta_max");
  }
  if (ceiling && !(*ceiling > 0.0)) throw Error(ErrorCode::kInvalidArgument, "ceiling must be > 0");
}

std::vector<double> adjust_lr(const LrPolicy& policy, std::span<const double> phi) {
  policy.validate();
  const double lo = policy.lower();
  double hi = policy.upper();
  if (policy.ceiling) hi = std::min(hi, *policy.ceiling);
  std::vector<double> out(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    double eta = policy.form == LrForm::kAdditive ? policy.eta0 + policy.alpha * phi[i]
                                                  : policy.eta0 * (1.0 + policy.alpha * phi[i]);
    eta = std::max(eta, lo);
    eta = std::min(eta, hi);
    out[i] = eta;
  }
  return out;
}

std::vector<double> random_baseline(double lo, double hi, std::uint64_t seed, std::size_t n) {
  if (!(lo < hi)) throw Error(ErrorCode::kInvalidArgument, "random baseline needs lo < hi");
  SeedStream stream(seed);
  std::vector<double> out(n);
  for (double& v : out) v = lo + (hi - lo) * stream.next_uniform();
  return out;
}

PersonalizedRates::PersonalizedRates(SignalKind kind, LrPolicy policy, Normalization norm)
    : kind_(kind), policy_(policy), norm_(norm) {
  policy_.validate();
}

std::vector<double> PersonalizedRates::rates(const std::vector<ClientState>& clients,
                                             const ServerState& server) {
  const std::size_t n = clients.size();
  warmup_ = false;
  if (kind_ == SignalKind::kDisabled) {
    phi_.assign(n, 0.0);
    return std::vector<double>(n, policy_.eta0);
  }
  if (kind_ == SignalKind::kRandomBaseline) {
    phi_.assign(n, 0.0);
    double hi = policy_.upper();
    if (policy_.ceiling) hi = std::min(hi, *policy_.ceiling);
    const double lo = std::min(policy_.lower(), hi);
    const std::uint64_t seed = derive_seed(RngRecipe{salted_seed(server.master_seed, 0x1a7e), server.round, 0, 0});
    if (!(lo < hi)) return std::vector<double>(n, hi);
    return random_baseline(lo, hi, seed, n);
  }
  const RawSignal raw = raw_signal(kind_, clients);
  warmup_ = raw.warmup;
  phi_ = normalize_phi(raw.values, norm_);
  return adjust_lr(policy_, phi_);
}

}  // namespace fedmezo
