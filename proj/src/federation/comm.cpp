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

#include "fedmezo/federation/comm.hpp"

#include <cmath>
#include <cstdio>

#include "fedmezo/core/error.hpp"

namespace fedmezo {

std::uint64_t comm_cost(std::uint64_t trainable_count, std::uint64_t bytes_per_param) noexcept {
  return trainable_count * bytes_per_param;
}

double to_mib(std::uint64_t bytes) noexcept { return static_cast<double>(bytes) / 1048576.0; }
double to_gib(std::uint64_t bytes) noexcept { return static_cast<double>(bytes) / 1073741824.0; }

std::string format_bytes(std::uint64_t bytes) {
  char buf[64];
  if (bytes >= (1ULL << 30)) {
    std::snprintf(buf, sizeof buf, "%.2f GiB", to_gib(bytes));
  } else if (bytes >= (1ULL << 20)) {
    std::snprintf(buf, sizeof buf, "%.2f MiB", to_mib(bytes));
  } else if (bytes >= (1ULL << 10)) {
    std::snprintf(buf, sizeof buf, "%.2f KiB", static_cast<double>(bytes) / 1024.0);
  } else {
    std::snprintf(buf, sizeof buf, "%llu B", static_cast<unsigned long long>(bytes));
  }
  return buf;
}

std::uint64_t back_derive_param_count(double gib, std::uint64_t bytes_per_param) {
  if (!(gib >= 0.0) || bytes_per_param == 0) {
    throw Error(ErrorCode::kInvalidArgument, "back_derive_param_count: bad inputs");
  }
  return static_cast<std::uint64_t>(std::llround(gib * 1073741824.0 / static_cast<double>(bytes_per_param)));
}

std::uint64_t CommLedger::record_round(std::uint64_t n_clients) noexcept {
  const std::uint64_t up = n_clients * per_client();
  cumulative_ += 2 * up;
  ++rounds_;
  return up;
}

}  // namespace fedmezo
