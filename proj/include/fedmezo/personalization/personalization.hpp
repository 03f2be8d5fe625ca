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
#include <span>
#include <string>
#include <vector>

#include "fedmezo/federation/protocol.hpp"

namespace fedmezo {

enum class SignalKind { kRoundLoss, kFiveRoundAvgLoss, kUpdateNormDiff, kRandomBaseline, kDisabled };

const char* to_string(SignalKind kind);
SignalKind parse_signal_kind(const std::string& text);

struct RawSignal {
  std::vector<double> values;
  bool warmup = false;  // history too short; values are all zero
};

// Mean-centred per-client heterogeneity signal. Loss signals read the
// clients' loss histories; kUpdateNormDiff reads last_update. Random and
// Disabled have no signal and return zeros (not flagged as warm-up).
RawSignal raw_signal(SignalKind kind, const std::vector<ClientState>& clients);

enum class Normalization { kMaxAbs, kTanhZScore };

const char* to_string(Normalization norm);
Normalization parse_normalization(const std::string& text);

// kMaxAbs: raw_i / (max_j |raw_j| + eps). kTanhZScore: tanh of the z-score
// (population std, eps-guarded). Both land in (-1, 1) and keep signs.
std::vector<double> normalize_phi(std::span<const double> raw,
                                  Normalization norm = Normalization::kMaxAbs, double eps = 1e-12);

enum class LrForm { kAdditive, kMultiplicative };

const char* to_string(LrForm form);
LrForm parse_lr_form(const std::string& text);

struct LrPolicy {
  double eta0 = 1e-5;
  double alpha = 5e-6;
  LrForm form = LrForm::kAdditive;
  // Clamp; unset bounds default to the band reachable with |Phi| <= 1.
  std::optional<double> eta_min;
  std::optional<double> eta_max;
  // Theory ceiling supplied by diagnostics.
  std::optional<double> ceiling;

  double lower() const;
  double upper() const;
  void validate() const;
};

// eta_i = eta0 + alpha Phi_i (additive) or eta0 (1 + alpha Phi_i), clamped.
std::vector<double> adjust_lr(const LrPolicy& policy, std::span<const double> phi);

// n i.i.d. uniform draws in [lo, hi] from SeedStream(seed).
std::vector<double> random_baseline(double lo, double hi, std::uint64_t seed, std::size_t n);

// Per-round rate strategy plugged into run_round.
class PersonalizedRates final : public LrStrategy {
 public:
  PersonalizedRates(SignalKind kind, LrPolicy policy, Normalization norm = Normalization::kMaxAbs);

  std::vector<double> rates(const std::vector<ClientState>& clients,
                            const ServerState& server) override;
  std::vector<double> last_phi() const override { return phi_; }
  bool last_warmup() const noexcept { return warmup_; }

  SignalKind kind() const noexcept { return kind_; }
  const LrPolicy& policy() const noexcept { return policy_; }

 private:
  SignalKind kind_;
  LrPolicy policy_;
  Normalization norm_;
  std::vector<double> phi_;
  bool warmup_ = false;
};

}  // namespace fedmezo
