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

#include "fedmezo/harness/config.hpp"

#include <fstream>
#include <set>

#include "fedmezo/core/error.hpp"

namespace fedmezo {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
    }
  }
}

template <typename T>
void read(const json& obj, const std::string& where, const char* key, T& out) {
  if (!obj.contains(key)) return;
  const std::string name = where.empty() ? key : where + "." + key;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(name, std::string("wrong type (") + e.what() + ")");
  }
}

template <typename T>
void read(const json& obj, const std::string& where, const char* key, std::optional<T>& out) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  T value{};
  read(obj, where, key, value);
  out = value;
}

void read_count(const json& obj, const std::string& where, const char* key, std::size_t& out) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(where.empty() ? key : where + "." + key, "must be a non-negative integer");
  }
  out = v.get<std::size_t>();
}

void require(bool ok, const std::string& key, const std::string& msg) {
  if (!ok) throw ConfigError(key, msg);
}

ObjectiveConfig parse_objective(const json& j) {
  if (!j.is_object()) throw ConfigError("objective", "must be an object");
  reject_unknown(j, "objective",
                 {"kind", "dim", "spectrum", "optimum_scale", "block_size", "repeats", "noise_samples",
                  "target_noise", "shift_scale", "curvature_spread", "data", "samples", "features",
                  "classes", "tasks", "margin", "l2", "hidden", "rank", "lora_alpha"});
  ObjectiveConfig o;
  const std::string w = "objective";
  read(j, w, "kind", o.kind);
  read_count(j, w, "dim", o.dim);
  read(j, w, "spectrum", o.spectrum);
  read(j, w, "optimum_scale", o.optimum_scale);
  read_count(j, w, "block_size", o.block_size);
  read_count(j, w, "repeats", o.repeats);
  read_count(j, w, "noise_samples", o.noise_samples);
  read(j, w, "target_noise", o.target_noise);
  read(j, w, "shift_scale", o.shift_scale);
  read(j, w, "curvature_spread", o.curvature_spread);
  read(j, w, "data", o.data);
  read_count(j, w, "samples", o.samples);
  read_count(j, w, "features", o.features);
  read(j, w, "classes", o.classes);
  read(j, w, "tasks", o.tasks);
  read(j, w, "margin", o.margin);
  read(j, w, "l2", o.l2);
  read(j, w, "hidden", o.hidden);
  read_count(j, w, "rank", o.rank);
  read(j, w, "lora_alpha", o.lora_alpha);

  require(o.kind == "quadratic" || o.kind == "logreg" || o.kind == "mlp-lora", "objective.kind",
          "must be quadratic, logreg or mlp-lora");
  require(o.dim >= 1, "objective.dim", "must be >= 1");
  require(!o.spectrum.empty() && (o.spectrum.size() <= 2 || o.spectrum.size() == o.dim),
          "objective.spectrum", "needs 1, 2 or dim values");
  for (double v : o.spectrum) require(v >= 0.0, "objective.spectrum", "must be >= 0");
  require(o.block_size == 0 || o.dim % o.block_size == 0, "objective.block_size", "must divide dim");
  require(o.block_size == 0 || o.noise_samples == 0, "objective.noise_samples",
          "cannot be combined with block_size");
  require(o.repeats >= 1, "objective.repeats", "must be >= 1");
  require(o.target_noise >= 0.0, "objective.target_noise", "must be >= 0");
  require(o.shift_scale >= 0.0, "objective.shift_scale", "must be >= 0");
  require(o.curvature_spread >= 0.0 && o.curvature_spread <= 1.0, "objective.curvature_spread",
          "must be in [0, 1]");
  require(o.samples >= 1, "objective.samples", "must be >= 1");
  require(o.features >= 1, "objective.features", "must be >= 1");
  require(!o.classes || *o.classes >= 2, "objective.classes", "must be >= 2");
  require(o.l2 >= 0.0, "objective.l2", "must be >= 0");
  require(o.rank >= 1, "objective.rank", "must be >= 1");
  for (std::size_t h : o.hidden) require(h >= 1, "objective.hidden", "layer widths must be >= 1");
  return o;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
  reject_unknown(j, "",
                 {"objective", "N", "T", "H", "mu", "perturbations", "lr", "lr_multiple_of_bound",
                  "batch_size", "split", "personalization", "optimizer", "restore", "seed",
                  "replicates", "output_dir", "eval_fraction", "patience", "record_timing",
                  "bytes_per_param", "workers"});
  if (!j.contains("objective")) throw ConfigError("objective", "required");
  ExperimentConfig c;
  c.objective = parse_objective(j.at("objective"));
  read_count(j, "", "N", c.N);
  read_count(j, "", "T", c.T);
  read_count(j, "", "H", c.H);
  read(j, "", "mu", c.mu);
  read_count(j, "", "perturbations", c.perturbations);
  read(j, "", "lr", c.lr);
  read(j, "", "lr_multiple_of_bound", c.lr_multiple_of_bound);
  read_count(j, "", "batch_size", c.batch_size);
  read(j, "", "optimizer", c.optimizer);
  read(j, "", "restore", c.restore);
  read(j, "", "seed", c.seed);
  read_count(j, "", "replicates", c.replicates);
  read(j, "", "output_dir", c.output_dir);
  read(j, "", "eval_fraction", c.eval_fraction);
  read_count(j, "", "patience", c.patience);
  read(j, "", "record_timing", c.record_timing);
  read_count(j, "", "bytes_per_param", c.bytes_per_param);
  read_count(j, "", "workers", c.workers);

  if (j.contains("split")) {
    const auto& s = j.at("split");
    if (!s.is_object()) throw ConfigError("split", "must be an object");
    reject_unknown(s, "split", {"kind", "beta"});
    read(s, "split", "kind", c.split.kind);
    read(s, "split", "beta", c.split.beta);
  }
  if (j.contains("personalization")) {
    const auto& p = j.at("personalization");
    if (!p.is_object()) throw ConfigError("personalization", "must be an object");
    reject_unknown(p, "personalization",
                   {"signal", "alpha", "form", "normalization", "eta_min", "eta_max", "clamp_to_bound"});
    const std::string w = "personalization";
    read(p, w, "signal", c.personalization.signal);
    read(p, w, "alpha", c.personalization.alpha);
    read(p, w, "form", c.personalization.form);
    read(p, w, "normalization", c.personalization.normalization);
    read(p, w, "eta_min", c.personalization.eta_min);
    read(p, w, "eta_max", c.personalization.eta_max);
    read(p, w, "clamp_to_bound", c.personalization.clamp_to_bound);
  }

  require(c.N >= 1, "N", "must be >= 1");
  require(c.H >= 1, "H", "must be >= 1");
  require(c.mu > 0.0, "mu", "must be > 0");
  require(c.perturbations >= 1, "perturbations", "must be >= 1");
  require(!c.lr || *c.lr > 0.0, "lr", "must be > 0");
  require(!c.lr_multiple_of_bound || *c.lr_multiple_of_bound > 0.0, "lr_multiple_of_bound", "must be > 0");
  require(!(c.lr && c.lr_multiple_of_bound), "lr_multiple_of_bound", "cannot be combined with lr");
  require(c.batch_size >= 1, "batch_size", "must be >= 1");
  require(c.optimizer == "fedmezo" || c.optimizer == "bp-fedavg", "optimizer",
          "must be fedmezo or bp-fedavg");
  require(c.restore == "inplace" || c.restore == "snapshot", "restore", "must be inplace or snapshot");
  require(c.replicates >= 1, "replicates", "must be >= 1");
  require(c.eval_fraction >= 0.0 && c.eval_fraction < 1.0, "eval_fraction", "must be in [0, 1)");
  require(!c.output_dir.empty(), "output_dir", "must be non-empty");
  require(c.split.kind == "iid" || c.split.kind == "dirichlet" || c.split.kind == "meta", "split.kind",
          "must be iid, dirichlet or meta");
  require(c.split.beta > 0.0, "split.beta", "must be > 0");
  const auto& p = c.personalization;
  require(p.signal == "disabled" || p.signal == "random" || p.signal == "round-loss" ||
              p.signal == "five-round-loss" || p.signal == "update-norm",
          "personalization.signal",
          "must be disabled, random, round-loss, five-round-loss or update-norm");
  require(p.form == "additive" || p.form == "multiplicative", "personalization.form",
          "must be additive or multiplicative");
  require(p.normalization == "max-abs" || p.normalization == "tanh-zscore",
          "personalization.normalization", "must be max-abs or tanh-zscore");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  const auto& o = c.objective;
  json obj = {{"kind", o.kind},
              {"dim", o.dim},
              {"spectrum", o.spectrum},
              {"optimum_scale", o.optimum_scale},
              {"block_size", o.block_size},
              {"repeats", o.repeats},
              {"noise_samples", o.noise_samples},
              {"target_noise", o.target_noise},
              {"shift_scale", o.shift_scale},
              {"curvature_spread", o.curvature_spread},
              {"data", o.data},
              {"samples", o.samples},
              {"features", o.features},
              {"classes", o.classes ? json(*o.classes) : json()},
              {"tasks", o.tasks},
              {"margin", o.margin},
              {"l2", o.l2},
              {"hidden", o.hidden},
              {"rank", o.rank},
              {"lora_alpha", o.lora_alpha}};
  const auto& p = c.personalization;
  json pers = {{"signal", p.signal},
               {"alpha", p.alpha ? json(*p.alpha) : json()},
               {"form", p.form},
               {"normalization", p.normalization},
               {"eta_min", p.eta_min ? json(*p.eta_min) : json()},
               {"eta_max", p.eta_max ? json(*p.eta_max) : json()},
               {"clamp_to_bound", p.clamp_to_bound}};
  return {{"objective", obj},
          {"N", c.N},
          {"T", c.T},
          {"H", c.H},
          {"mu", c.mu},
          {"perturbations", c.perturbations},
          {"lr", c.lr ? json(*c.lr) : json()},
          {"lr_multiple_of_bound", c.lr_multiple_of_bound ? json(*c.lr_multiple_of_bound) : json()},
          {"batch_size", c.batch_size},
          {"split", {{"kind", c.split.kind}, {"beta", c.split.beta}}},
          {"personalization", pers},
          {"optimizer", c.optimizer},
          {"restore", c.restore},
          {"seed", c.seed},
          {"replicates", c.replicates},
          {"output_dir", c.output_dir},
          {"eval_fraction", c.eval_fraction},
          {"patience", c.patience},
          {"record_timing", c.record_timing},
          {"bytes_per_param", c.bytes_per_param},
          {"workers", c.workers}};
}

}  // namespace fedmezo
