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

#include <stdexcept>
#include <string>

namespace fedmezo {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidDimension,
  kInvalidRank,
  kNumericalOverflow,
  kNonConvergence,
  kInvalidRegime,
  kUndefinedRank,
  kDimensionTooLarge,
  kDegenerateRegression,
  kEmptyShard,
  kRoundFailed,
  kConfig,
  kIo,
};

const char* to_string(ErrorCode code);

// Base error for everything thrown by the library. The code lets callers
// (the CLI in particular) map failures to exit statuses without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// A perturbed loss evaluation produced NaN/Inf.
class NumericalOverflowError : public Error {
 public:
  NumericalOverflowError(const std::string& message, double params_norm)
      : Error(ErrorCode::kNumericalOverflow, message), params_norm_(params_norm) {}

  double params_norm() const noexcept { return params_norm_; }

 private:
  double params_norm_;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& message, double last_residual)
      : Error(ErrorCode::kNonConvergence, message), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

// Configuration problems carry the offending key so the CLI can name it.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : Error(ErrorCode::kConfig, key.empty() ? message : key + ": " + message),
        key_(key) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace fedmezo
