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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fedmezo/core/dense.hpp"

namespace fedmezo {

enum class SliceRole { kDense, kAdapterA, kAdapterB };

struct ParamSlice {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;
  SliceRole role = SliceRole::kDense;
};

// Maps ranges of the flat trainable vector to model components.
class ParamLayout {
 public:
  ParamLayout() = default;
  explicit ParamLayout(std::vector<ParamSlice> slices);

  static std::shared_ptr<const ParamLayout> single(std::size_t n, std::string name = "theta");

  std::size_t total() const noexcept { return total_; }
  const std::vector<ParamSlice>& slices() const noexcept { return slices_; }
  const ParamSlice& find(const std::string& name) const;

 private:
  std::vector<ParamSlice> slices_;
  std::size_t total_ = 0;
};

// Flat trainable parameters plus their layout. Single-owner mutable buffer.
class ParamsView {
 public:
  ParamsView() = default;
  ParamsView(DenseVector values, std::shared_ptr<const ParamLayout> layout);

  std::size_t size() const noexcept { return values_.size(); }
  std::span<double> span() noexcept { return values_.span(); }
  std::span<const double> span() const noexcept { return values_.span(); }
  operator std::span<const double>() const noexcept { return values_.span(); }

  std::span<double> slice(const std::string& name);
  std::span<const double> slice(const std::string& name) const;

  const DenseVector& values() const noexcept { return values_; }
  DenseVector& values() noexcept { return values_; }
  const std::shared_ptr<const ParamLayout>& layout() const noexcept { return layout_; }

 private:
  DenseVector values_;
  std::shared_ptr<const ParamLayout> layout_;
};

}  // namespace fedmezo
