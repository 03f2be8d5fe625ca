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

#include <cstdint>
#include <string>

namespace fedmezo {

// Bytes needed to ship `trainable_count` parameters one way.
std::uint64_t comm_cost(std::uint64_t trainable_count, std::uint64_t bytes_per_param) noexcept;

double to_mib(std::uint64_t bytes) noexcept;
double to_gib(std::uint64_t bytes) noexcept;
// "81.25 MiB", "6.39 GiB", "512 B"
std::string format_bytes(std::uint64_t bytes);

// Parameter count whose transmission costs `gib` GiB, rounded to the nearest
// whole parameter.
std::uint64_t back_derive_param_count(double gib, std::uint64_t bytes_per_param);

// Cumulative traffic of a federation that ships the trainable vector down to
// and back up from every client each round.
class CommLedger {
 public:
  CommLedger(std::uint64_t trainable_count, std::uint64_t bytes_per_param)
      : trainable_count_(trainable_count), bytes_per_param_(bytes_per_param) {}

  std::uint64_t per_client() const noexcept { return comm_cost(trainable_count_, bytes_per_param_); }
  // Adds one round; returns bytes uploaded in it.
  std::uint64_t record_round(std::uint64_t n_clients) noexcept;

  std::uint64_t cumulative() const noexcept { return cumulative_; }
  std::uint64_t rounds() const noexcept { return rounds_; }
  std::uint64_t trainable_count() const noexcept { return trainable_count_; }
  std::uint64_t bytes_per_param() const noexcept { return bytes_per_param_; }

 private:
  std::uint64_t trainable_count_;
  std::uint64_t bytes_per_param_;
  std::uint64_t cumulative_ = 0;
  std::uint64_t rounds_ = 0;
};

}  // namespace fedmezo
