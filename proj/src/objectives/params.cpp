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

#include "fedmezo/objectives/params.hpp"

#include <utility>

#include "fedmezo/core/error.hpp"

namespace fedmezo {

ParamLayout::ParamLayout(std::vector<ParamSlice> slices) : slices_(std::move(slices)) {
  for (const auto& s : slices_) {
    if (s.offset != total_) {
      throw Error(ErrorCode::kInvalidArgument, "param slices must be contiguous: " + s.name);
    }
    total_ += s.length;
  }
}

std::shared_ptr<const ParamLayout> ParamLayout::single(std::size_t n, std::string name) {
  return std::make_shared<const ParamLayout>(
      std::vector<ParamSlice>{ParamSlice{std::move(name), 0, n, SliceRole::kDense}});
}

const ParamSlice& ParamLayout::find(const std::string& name) const {
  for (const auto& s : slices_) {
    if (s.name == name) return s;
  }
  throw Error(ErrorCode::kInvalidArgument, "no parameter slice named " + name);
}

ParamsView::ParamsView(DenseVector values, std::shared_ptr<const ParamLayout> layout)
    : values_(std::move(values)), layout_(std::move(layout)) {
  if (!layout_) layout_ = ParamLayout::single(values_.size());
  if (layout_->total() != values_.size()) {
    throw Error(ErrorCode::kInvalidDimension, "layout does not match parameter count");
  }
}

std::span<double> ParamsView::slice(const std::string& name) {
  const auto& s = layout_->find(name);
  return values_.span().subspan(s.offset, s.length);
}

std::span<const double> ParamsView::slice(const std::string& name) const {
  const auto& s = layout_->find(name);
  return values_.span().subspan(s.offset, s.length);
}

}  // namespace fedmezo
