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
#include <memory>
#include <span>
#include <vector>

#include "fedmezo/core/dense.hpp"
#include "fedmezo/objectives/dataset.hpp"
#include "fedmezo/objectives/objective.hpp"
#include "fedmezo/objectives/params.hpp"

namespace fedmezo {

// Tanh MLP whose every linear layer is W0 + (alpha / rank) * B * A with W0
// (and the bias) frozen. Only the A, B factors are trainable.
struct MlpLoraSpec {
  std::vector<std::size_t> dims;  // input, hidden..., output
  std::vector<DenseMatrix> base_weights;  // layer l: dims[l+1] x dims[l]
  std::vector<DenseVector> base_biases;
  std::size_t rank = 4;
  double alpha = 8.0;

  std::size_t layers() const noexcept { return dims.empty() ? 0 : dims.size() - 1; }
  double scale() const noexcept { return alpha / static_cast<double>(rank); }
};

// Random frozen base weights (N(0, 1/d_in)) and zero biases.
MlpLoraSpec make_mlp_lora_spec(std::vector<std::size_t> dims, std::size_t rank, double alpha,
                               std::uint64_t seed);

// sum over layers of rank * (d_in + d_out)
std::size_t lora_trainable_count(std::span<const std::size_t> dims, std::size_t rank);

std::shared_ptr<const ParamLayout> lora_layout(const MlpLoraSpec& spec);

// A ~ 0.01 * N(0, 1), B = 0: the adapted model starts equal to the base model.
ParamsView init_lora(const MlpLoraSpec& spec, std::uint64_t seed);

class MlpLoraObjective final : public Objective {
 public:
  MlpLoraObjective(MlpLoraSpec spec, std::shared_ptr<const Dataset> data);

  ObjectiveKind kind() const noexcept override { return ObjectiveKind::kMlpLora; }
  std::size_t dim() const noexcept override { return layout_->total(); }
  std::size_t sample_count() const noexcept override { return data_->rows(); }
  double loss(std::span<const double> params, const Batch& batch) const override;
  DenseVector gradient(std::span<const double> params, const Batch& batch) const override;
  std::shared_ptr<const ParamLayout> layout() const override { return layout_; }

  // Forward pass of the frozen base model alone.
  double base_loss(const Batch& batch) const;

  const MlpLoraSpec& spec() const noexcept { return spec_; }

  // Flat [W0, b0, A, B] per layer, i.e. what full-parameter transmission
  // would send, and the positions of the trainable entries inside it.
  DenseVector full_parameters(std::span<const double> trainable) const;
  std::vector<std::size_t> trainable_slots() const;

 private:
  struct Trace {
    std::vector<std::vector<double>> inputs;   // h_l feeding layer l
    std::vector<std::vector<double>> reduced;  // A_l h_l
    std::vector<double> probs;
  };
  double sample_loss(std::span<const double> params, std::size_t row, bool with_adapters,
                     Trace* trace) const;

  MlpLoraSpec spec_;
  std::shared_ptr<const Dataset> data_;
  std::shared_ptr<const ParamLayout> layout_;
  std::vector<std::size_t> a_offsets_;
  std::vector<std::size_t> b_offsets_;
};

}  // namespace fedmezo
