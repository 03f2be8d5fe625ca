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

#include "fedmezo/core/rng.hpp"

#include <cmath>
#include <numbers>

#include "fedmezo/core/error.hpp"

namespace fedmezo {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace

std::uint64_t derive_seed(const RngRecipe& recipe) noexcept {
  // Each field goes through its own finalizer round with a distinct odd
  // offset, so tuples that differ in a single field never alias.
  std::uint64_t h = mix64(recipe.master_seed + kGolden);
  h = mix64(h ^ (recipe.round + 0x632be59bd9b4e019ULL));
  h = mix64(h ^ (recipe.client + 0x8cb92ba72f3d8dd7ULL));
  h = mix64(h ^ (recipe.step + 0xd6e8feb86659fd93ULL));
  return h;
}

std::uint64_t salted_seed(std::uint64_t master_seed, std::uint64_t salt) noexcept {
  return derive_seed(RngRecipe{master_seed, ~0ULL, ~0ULL, salt});
}

std::uint64_t SeedStream::next_u64() noexcept {
  ++draws_;
  state_ += kGolden;
  return mix64(state_);
}

double SeedStream::next_uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeedStream::next_uniform_open() noexcept {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

std::uint64_t SeedStream::next_below(std::uint64_t n) noexcept {
  // Lemire's multiply-shift; the bias is < n / 2^64, irrelevant at our sizes.
  __extension__ using u128 = unsigned __int128;
  const u128 product = static_cast<u128>(next_u64()) * n;
  return static_cast<std::uint64_t>(product >> 64);
}

std::pair<double, double> box_muller(SeedStream& stream) noexcept {
  const double u1 = stream.next_uniform_open();
  const double u2 = stream.next_uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

DenseVector sample_gaussian(SeedStream& stream, std::size_t d) {
  if (d == 0) throw Error(ErrorCode::kInvalidDimension, "sample_gaussian: d must be >= 1");
  DenseVector out(d);
  fill_gaussian(stream, out.span());
  return out;
}

void fill_gaussian(SeedStream& stream, std::span<double> out) {
  std::size_t i = 0;
  while (i < out.size()) {
    auto [a, b] = box_muller(stream);
    out[i++] = a;
    if (i < out.size()) out[i++] = b;
  }
}

double sample_gamma(SeedStream& stream, double shape) {
  if (!(shape > 0.0)) throw Error(ErrorCode::kInvalidArgument, "gamma shape must be > 0");
  if (shape < 1.0) {
    // Gamma(a) = Gamma(a + 1) * U^(1/a)
    const double g = sample_gamma(stream, shape + 1.0);
    return g * std::pow(stream.next_uniform_open(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = box_muller(stream).first;
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.next_uniform_open();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace fedmezo
