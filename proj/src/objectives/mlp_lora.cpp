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

#include "fedmezo/objectives/mlp_lora.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedmezo/core/error.hpp"
#include "fedmezo/core/rng.hpp"

namespace fedmezo {

namespace {

void check_rank(std::span<const std::size_t> dims, std::size_t rank) {
  if (dims.size() < 2) throw Error(ErrorCode::kInvalidArgument, "mlp needs at least two layer dims");
  for (std::size_t d : dims) {
    if (d == 0) throw Error(ErrorCode::kInvalidDimension, "mlp layer dims must be >= 1");
  }
  if (rank == 0) throw Error(ErrorCode::kInvalidRank, "lora rank must be >= 1");
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    if (rank > std::min(dims[l], dims[l + 1])) {
      throw Error(ErrorCode::kInvalidRank,
                  "lora rank " + std::to_string(rank) + " exceeds min(d_in, d_out) of layer " +
                      std::to_string(l));
    }
  }
}

}  // namespace

MlpLoraSpec make_mlp_lora_spec(std::vector<std::size_t> dims, std::size_t rank, double alpha,
                               std::uint64_t seed) {
  check_rank(dims, rank);
  MlpLoraSpec spec;
  spec.dims = std::move(dims);
  spec.rank = rank;
  spec.alpha = alpha;
  SeedStream stream(salted_seed(seed, 0xba5e0));
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const std::size_t din = spec.dims[l];
    const std::size_t dout = spec.dims[l + 1];
    DenseVector w = sample_gaussian(stream, din * dout);
    w *= 1.0 / std::sqrt(static_cast<double>(din));
    spec.base_weights.emplace_back(dout, din, w.values());
    spec.base_biases.emplace_back(dout, 0.0);
  }
  return spec;
}

std::size_t lora_trainable_count(std::span<const std::size_t> dims, std::size_t rank) {
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) total += rank * (dims[l] + dims[l + 1]);
  return total;
}

std::shared_ptr<const ParamLayout> lora_layout(const MlpLoraSpec& spec) {
  std::vector<ParamSlice> slices;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const std::size_t a_len = spec.rank * spec.dims[l];
    const std::size_t b_len = spec.dims[l + 1] * spec.rank;
    slices.push_back({"layer" + std::to_string(l) + ".A", offset, a_len, SliceRole::kAdapterA});
    offset += a_len;
    slices.push_back({"layer" + std::to_string(l) + ".B", offset, b_len, SliceRole::kAdapterB});
    offset += b_len;
  }
  return std::make_shared<const ParamLayout>(std::move(slices));
}

ParamsView init_lora(const MlpLoraSpec& spec, std::uint64_t seed) {
  check_rank(spec.dims, spec.rank);
  auto layout = lora_layout(spec);
  DenseVector values(layout->total());
  SeedStream stream(salted_seed(seed, 0x10a));
  for (const auto& slice : layout->slices()) {
    if (slice.role != SliceRole::kAdapterA) continue;
    fill_gaussian(stream, values.span().subspan(slice.offset, slice.length));
    for (std::size_t j = 0; j < slice.length; ++j) values[slice.offset + j] *= 0.01;
  }
  return ParamsView(std::move(values), std::move(layout));
}

MlpLoraObjective::MlpLoraObjective(MlpLoraSpec spec, std::shared_ptr<const Dataset> data)
    : spec_(std::move(spec)), data_(std::move(data)) {
  check_rank(spec_.dims, spec_.rank);
  if (!data_) throw Error(ErrorCode::kInvalidArgument, "mlp-lora: null dataset");
  if (spec_.base_weights.size() != spec_.layers() || spec_.base_biases.size() != spec_.layers()) {
    throw Error(ErrorCode::kInvalidDimension, "mlp-lora: one base weight and bias per layer");
  }
  for (std::size_t l = 0; l < spec_.layers(); ++l) {
    if (spec_.base_weights[l].rows() != spec_.dims[l + 1] ||
        spec_.base_weights[l].cols() != spec_.dims[l] ||
        spec_.base_biases[l].size() != spec_.dims[l + 1]) {
      throw Error(ErrorCode::kInvalidDimension, "mlp-lora: base shape mismatch at layer " +
                                                    std::to_string(l));
    }
  }
  if (data_->feature_dim() != spec_.dims.front()) {
    throw Error(ErrorCode::kInvalidDimension, "mlp-lora: feature dim != input dim");
  }
  if (static_cast<std::size_t>(data_->num_classes()) > spec_.dims.back()) {
    throw Error(ErrorCode::kInvalidArgument, "mlp-lora: more classes than output units");
  }
  layout_ = lora_layout(spec_);
  for (const auto& s : layout_->slices()) {
    (s.role == SliceRole::kAdapterA ? a_offsets_ : b_offsets_).push_back(s.offset);
  }
}

double MlpLoraObjective::sample_loss(std::span<const double> params, std::size_t row,
                                     bool with_adapters, Trace* trace) const {
  const double scale = spec_.scale();
  const std::size_t r = spec_.rank;
  const std::size_t layers = spec_.layers();
  std::vector<double> h(data_->row(row).begin(), data_->row(row).end());
  std::vector<double> u(r);
  std::vector<double> z;
  if (trace) {
    trace->inputs.assign(layers, {});
    trace->reduced.assign(layers, {});
  }
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t din = spec_.dims[l];
    const std::size_t dout = spec_.dims[l + 1];
    const auto& w0 = spec_.base_weights[l];
    z.assign(spec_.base_biases[l].begin(), spec_.base_biases[l].end());
    for (std::size_t o = 0; o < dout; ++o) {
      const auto wrow = w0.row(o);
      double acc = 0.0;
      for (std::size_t i = 0; i < din; ++i) acc += wrow[i] * h[i];
      z[o] += acc;
    }
    if (with_adapters) {
      const double* a = params.data() + a_offsets_[l];
      const double* b = params.data() + b_offsets_[l];
      for (std::size_t k = 0; k < r; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < din; ++i) acc += a[k * din + i] * h[i];
        u[k] = acc;
      }
      for (std::size_t o = 0; o < dout; ++o) {
        double acc = 0.0;
        for (std::size_t k = 0; k < r; ++k) acc += b[o * r + k] * u[k];
        z[o] += scale * acc;
      }
    }
    if (trace) {
      trace->inputs[l] = h;
      trace->reduced[l] = u;
    }
    if (l + 1 < layers) {
      for (double& v : z) v = std::tanh(v);
      h = z;
    }
  }
  const double zmax = *std::max_element(z.begin(), z.end());
  double denom = 0.0;
  for (double v : z) denom += std::exp(v - zmax);
  const double lse = zmax + std::log(denom);
  if (trace) {
    trace->probs.resize(z.size());
    for (std::size_t o = 0; o < z.size(); ++o) trace->probs[o] = std::exp(z[o] - lse);
  }
  return lse - z[static_cast<std::size_t>(data_->labels()[row])];
}

double MlpLoraObjective::loss(std::span<const double> params, const Batch& batch) const {
  double acc = 0.0;
  for (std::size_t s : batch.indices) acc += sample_loss(params, s, true, nullptr);
  return acc / static_cast<double>(batch.indices.size());
}

double MlpLoraObjective::base_loss(const Batch& batch) const {
  check_batch(*this, batch);
  double acc = 0.0;
  for (std::size_t s : batch.indices) acc += sample_loss({}, s, false, nullptr);
  return acc / static_cast<double>(batch.indices.size());
}

DenseVector MlpLoraObjective::gradient(std::span<const double> params, const Batch& batch) const {
  DenseVector grad(dim());
  const double scale = spec_.scale();
  const double inv = 1.0 / static_cast<double>(batch.indices.size());
  const std::size_t r = spec_.rank;
  Trace trace;
  std::vector<double> delta;
  std::vector<double> bt_delta(r);
  std::vector<double> delta_h;
  for (std::size_t s : batch.indices) {
    sample_loss(params, s, true, &trace);
    delta = trace.probs;
    delta[static_cast<std::size_t>(data_->labels()[s])] -= 1.0;
    for (std::size_t l = spec_.layers(); l-- > 0;) {
      const std::size_t din = spec_.dims[l];
      const std::size_t dout = spec_.dims[l + 1];
      const double* a = params.data() + a_offsets_[l];
      const double* b = params.data() + b_offsets_[l];
      double* ga = grad.data() + a_offsets_[l];
      double* gb = grad.data() + b_offsets_[l];
      const auto& h = trace.inputs[l];
      const auto& u = trace.reduced[l];
      // dL/dB = s * delta u^T
      for (std::size_t o = 0; o < dout; ++o) {
        for (std::size_t k = 0; k < r; ++k) gb[o * r + k] += inv * scale * delta[o] * u[k];
      }
      for (std::size_t k = 0; k < r; ++k) {
        double acc = 0.0;
        for (std::size_t o = 0; o < dout; ++o) acc += b[o * r + k] * delta[o];
        bt_delta[k] = scale * acc;
      }
      // dL/dA = s * (B^T delta) h^T
      for (std::size_t k = 0; k < r; ++k) {
        for (std::size_t i = 0; i < din; ++i) ga[k * din + i] += inv * bt_delta[k] * h[i];
      }
      if (l == 0) break;
      delta_h.assign(din, 0.0);
      const auto& w0 = spec_.base_weights[l];
      for (std::size_t o = 0; o < dout; ++o) {
        const auto wrow = w0.row(o);
        for (std::size_t i = 0; i < din; ++i) delta_h[i] += wrow[i] * delta[o];
      }
      for (std::size_t k = 0; k < r; ++k) {
        for (std::size_t i = 0; i < din; ++i) delta_h[i] += a[k * din + i] * bt_delta[k];
      }
      for (std::size_t i = 0; i < din; ++i) delta_h[i] *= 1.0 - h[i] * h[i];
      delta.swap(delta_h);
    }
  }
  return grad;
}

DenseVector MlpLoraObjective::full_parameters(std::span<const double> trainable) const {
  check_params(*this, trainable);
  std::vector<double> out;
  for (std::size_t l = 0; l < spec_.layers(); ++l) {
    const auto w = spec_.base_weights[l].values();
    out.insert(out.end(), w.begin(), w.end());
    out.insert(out.end(), spec_.base_biases[l].begin(), spec_.base_biases[l].end());
    const std::size_t a_len = spec_.rank * spec_.dims[l];
    const std::size_t b_len = spec_.dims[l + 1] * spec_.rank;
    out.insert(out.end(), trainable.begin() + static_cast<std::ptrdiff_t>(a_offsets_[l]),
               trainable.begin() + static_cast<std::ptrdiff_t>(a_offsets_[l] + a_len));
    out.insert(out.end(), trainable.begin() + static_cast<std::ptrdiff_t>(b_offsets_[l]),
               trainable.begin() + static_cast<std::ptrdiff_t>(b_offsets_[l] + b_len));
  }
  return DenseVector::from(out);
}

std::vector<std::size_t> MlpLoraObjective::trainable_slots() const {
  std::vector<std::size_t> slots;
  std::size_t pos = 0;
  for (std::size_t l = 0; l < spec_.layers(); ++l) {
    const std::size_t din = spec_.dims[l];
    const std::size_t dout = spec_.dims[l + 1];
    pos += dout * din + dout;
    const std::size_t n_train = spec_.rank * (din + dout);
    for (std::size_t j = 0; j < n_train; ++j) slots.push_back(pos + j);
    pos += n_train;
  }
  return slots;
}

}  // namespace fedmezo
