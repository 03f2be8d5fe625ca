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
#include <limits>
#include <span>
#include <utility>

#include "fedmezo/core/dense.hpp"

namespace fedmezo {

// Coordinates of one random stream: (master seed, round t, client i, local
// step k). Every perturbation, batch draw and learning-rate draw in the
// simulator is keyed by such a tuple, so client execution order never
// changes which numbers a client sees.
struct RngRecipe {
  std::uint64_t master_seed = 0;
  std::uint64_t round = 0;
  std::uint64_t client = 0;
  std::uint64_t step = 0;

  friend bool operator==(const RngRecipe&, const RngRecipe&) = default;
};

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_seed(const RngRecipe& recipe) noexcept;

// Seed for an auxiliary purpose (batch sampling, lr draws, replicates...)
// that must not collide with the perturbation streams.
std::uint64_t salted_seed(std::uint64_t master_seed, std::uint64_t salt) noexcept;

// SplitMix64 generator. Satisfies UniformRandomBitGenerator.
class SeedStream {
 public:
  using result_type = std::uint64_t;

  explicit SeedStream(std::uint64_t seed) noexcept : seed_(seed), state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return next_u64(); }
  std::uint64_t next_u64() noexcept;

  // Uniform in [0, 1) with 53 random bits.
  double next_uniform() noexcept;
  // Uniform in (0, 1]; safe to pass to log().
  double next_uniform_open() noexcept;
  // Uniform integer in [0, n). n must be >= 1.
  std::uint64_t next_below(std::uint64_t n) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t state() const noexcept { return state_; }
  std::uint64_t draws_emitted() const noexcept { return draws_; }

  void restart() noexcept {
    state_ = seed_;
    draws_ = 0;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  std::uint64_t draws_ = 0;
};

// One Box-Muller pair: consumes exactly two uniforms.
std::pair<double, double> box_muller(SeedStream& stream) noexcept;

// Standard normals read one at a time. The sequence equals what
// sample_gaussian() produces from the same seed, so a perturbation can be
// regenerated coordinate by coordinate without storing it.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) noexcept : stream_(seed) {}

  double next() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    auto [a, b] = box_muller(stream_);
    spare_ = b;
    has_spare_ = true;
    return a;
  }

  void restart() noexcept {
    stream_.restart();
    has_spare_ = false;
  }

 private:
  SeedStream stream_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// d i.i.d. standard normals drawn in Box-Muller pairs; for odd d the unused
// half of the last pair is discarded.
DenseVector sample_gaussian(SeedStream& stream, std::size_t d);
void fill_gaussian(SeedStream& stream, std::span<double> out);

// Gamma(shape, 1) via Marsaglia-Tsang, used by the Dirichlet splitter.
double sample_gamma(SeedStream& stream, double shape);

}  // namespace fedmezo
