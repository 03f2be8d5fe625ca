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

#include "fedmezo/harness/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "fedmezo/core/error.hpp"
#include "fedmezo/core/rng.hpp"
#include "fedmezo/core/spectral.hpp"
#include "fedmezo/diagnostics/measure.hpp"
#include "fedmezo/diagnostics/theory.hpp"
#include "fedmezo/federation/comm.hpp"
#include "fedmezo/federation/heterogeneity.hpp"
#include "fedmezo/federation/protocol.hpp"
#include "fedmezo/objectives/logreg.hpp"
#include "fedmezo/objectives/mlp_lora.hpp"
#include "fedmezo/objectives/quadratic.hpp"
#include "fedmezo/personalization/personalization.hpp"

namespace fedmezo {

using nlohmann::json;

namespace {

std::vector<double> expand_spectrum(const ObjectiveConfig& o) {
  if (o.spectrum.size() == o.dim) return o.spectrum;
  if (o.spectrum.size() == 1) return std::vector<double>(o.dim, o.spectrum[0]);
  return linspace(o.spectrum[0], o.spectrum[1], o.dim);
}

void build_quadratic(const ExperimentConfig& cfg, Problem& p) {
  const auto& o = cfg.objective;
  const std::vector<double> spectrum = expand_spectrum(o);
  SeedStream stream(salted_seed(cfg.seed, 0x0b7));
  DenseVector optimum = sample_gaussian(stream, o.dim);
  optimum *= o.optimum_scale;
  QuadraticSpec base;
  if (o.block_size > 0) {
    base = make_sparse_block_quadratic(spectrum, optimum, o.block_size, o.repeats, cfg.seed);
  } else if (o.noise_samples > 0) {
    base = make_target_noise_quadratic(DenseMatrix::diagonal(spectrum), optimum, o.noise_samples,
                                       o.target_noise, cfg.seed);
  } else {
    base = QuadraticSpec{DenseMatrix::diagonal(spectrum), optimum, 0.0, {}};
  }
  const auto specs = make_client_quadratics(cfg.N, base, Heterogeneity{o.shift_scale, o.curvature_spread},
                                            cfg.seed);
  DenseMatrix curvature_sum(o.dim, o.dim);
  DenseVector rhs(o.dim);
  std::vector<double> acc(o.dim * o.dim, 0.0);
  for (const auto& s : specs) {
    auto q = std::make_shared<const QuadraticObjective>(s);
    p.L = std::max(p.L, q->smoothness());
    const auto& g = q->global_curvature();
    const DenseVector gb = g.multiply(q->global_optimum());
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += g.values()[k];
    rhs += gb;
    p.clients.push_back(std::move(q));
  }
  p.init = DenseVector(o.dim);
  p.train_objective = std::make_shared<const MeanObjective>(p.clients);
  p.eval_objective = p.train_objective;
  p.eval_batch = p.train_objective->full_batch();
  try {
    const DenseVector theta_star = solve_spd(DenseMatrix(o.dim, o.dim, std::move(acc)), rhs);
    p.f_star = p.train_objective->loss(theta_star, p.eval_batch);
  } catch (const Error&) {
    p.f_star.reset();  // singular global curvature: minimum not unique
  }
}

void build_dataset_problem(const ExperimentConfig& cfg, Problem& p) {
  const auto& o = cfg.objective;
  const bool mlp = o.kind == "mlp-lora";
  Dataset ds = [&] {
    if (!o.data.empty()) return load_csv(o.data);
    SyntheticSpec spec;
    spec.samples = o.samples;
    spec.dim = o.features;
    spec.classes = o.classes.value_or(mlp ? 4 : 2);
    spec.tasks = o.tasks;
    spec.margin = o.margin;
    spec.seed = cfg.seed;
    return make_synthetic_classification(spec);
  }();
  p.data = std::make_shared<const Dataset>(std::move(ds));
  auto [train, eval] = holdout_split(p.data->rows(), cfg.eval_fraction, cfg.seed);
  SplitSpec split;
  split.kind = parse_split_kind(cfg.split.kind);
  split.n_clients = cfg.N;
  split.beta = cfg.split.beta;
  split.seed = cfg.seed;
  p.shards = split_rows(*p.data, train, split);
  if (eval.empty()) eval = train;

  if (!mlp) {
    if (p.data->num_classes() > 2) throw ConfigError("objective.classes", "logreg is binary");
    const LogRegSpec spec{o.l2};
    for (const auto& shard : p.shards) {
      auto obj = std::make_shared<const LogRegObjective>(
          std::make_shared<const Dataset>(p.data->subset(shard)), spec);
      p.L = std::max(p.L, obj->smoothness_bound());
      p.clients.push_back(std::move(obj));
    }
    p.eval_objective = std::make_shared<const LogRegObjective>(
        std::make_shared<const Dataset>(p.data->subset(eval)), spec);
    p.init = DenseVector(p.data->feature_dim());
  } else {
    std::vector<std::size_t> dims{p.data->feature_dim()};
    dims.insert(dims.end(), o.hidden.begin(), o.hidden.end());
    dims.push_back(std::max<std::size_t>(static_cast<std::size_t>(p.data->num_classes()),
                                         static_cast<std::size_t>(o.classes.value_or(2))));
    MlpLoraSpec spec;
    try {
      spec = make_mlp_lora_spec(dims, o.rank, o.lora_alpha, cfg.seed);
    } catch (const Error& e) {
      throw ConfigError("objective.rank", e.what());
    }
    p.init = init_lora(spec, cfg.seed).values();
    for (const auto& shard : p.shards) {
      auto obj = std::make_shared<const MlpLoraObjective>(
          spec, std::make_shared<const Dataset>(p.data->subset(shard)));
      p.L = std::max(p.L, estimate_smoothness(*obj, p.init, 60, cfg.seed));
      p.clients.push_back(std::move(obj));
    }
    p.eval_objective = std::make_shared<const MlpLoraObjective>(
        spec, std::make_shared<const Dataset>(p.data->subset(eval)));
  }
  p.train_objective = std::make_shared<const MeanObjective>(p.clients);
  p.eval_batch = p.eval_objective->full_batch();
}

void measure_batch_constants(const ExperimentConfig& cfg, Problem& p) {
  CgSigmaOptions opt;
  opt.probes.probes = 20;
  opt.probes.scale = cfg.objective.kind == "mlp-lora" ? 0.1 : 1.0;
  opt.probes.center = p.init;
  opt.probes.seed = cfg.seed;
  opt.batch_size = cfg.batch_size;
  opt.batches_per_probe = 200;
  for (const auto& c : p.clients) {
    opt.exhaustive = cfg.batch_size == 1 && c->sample_count() <= 20000;
    const CgSigmaFit fit = estimate_cg_sigma(*c, opt);
    p.c_g = std::max(p.c_g, fit.c_g);
    p.sigma_g_sq = std::max(p.sigma_g_sq, fit.sigma_g_sq);
  }
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

json stats(const std::vector<double>& v) {
  return {{"mean", mean_of(v)}, {"std", sample_std(v)}, {"values", v}};
}

class LineWriter {
 public:
  LineWriter() = default;
  explicit LineWriter(const std::filesystem::path& path) : out_(path, std::ios::trunc) {
    if (!out_) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }
  void write(const json& row) {
    if (!out_.is_open()) return;
    out_ << row.dump() << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace

Problem build_problem(ExperimentConfig& cfg) {
  Problem p;
  if (cfg.objective.kind == "quadratic") {
    build_quadratic(cfg, p);
  } else {
    build_dataset_problem(cfg, p);
  }
  measure_batch_constants(cfg, p);
  p.lr_bound = lr_bound(static_cast<double>(cfg.H), p.L, p.c_g, static_cast<double>(p.init.size()),
                        static_cast<double>(cfg.N));
  p.eta0 = cfg.lr ? *cfg.lr : cfg.lr_multiple_of_bound.value_or(0.5) * p.lr_bound;
  if (p.eta0 > p.lr_bound) {
    cfg.warnings.push_back("lr " + std::to_string(p.eta0) + " exceeds the theory ceiling " +
                           std::to_string(p.lr_bound));
  }
  return p;
}

std::uint64_t replicate_seed(std::uint64_t seed, std::size_t r) {
  return derive_seed(RngRecipe{seed, r, 0, 0x5eedULL});
}

RunResult run_experiment(ExperimentConfig cfg, const RunOverrides& overrides) {
  Problem problem = build_problem(cfg);
  const std::filesystem::path dir(cfg.output_dir);
  LineWriter metrics;
  LineWriter timing;
  if (overrides.write_files) {
    std::filesystem::create_directories(dir);
    metrics = LineWriter(dir / "metrics.jsonl");
    if (cfg.record_timing) timing = LineWriter(dir / "timing.jsonl");
    write_json(dir / "config.json", to_json(cfg));
    if (!problem.shards.empty()) write_json(dir / "shards.json", shards_to_json(problem.shards));
  }

  LrPolicy policy;
  policy.eta0 = problem.eta0;
  policy.alpha = cfg.personalization.alpha.value_or(0.5 * problem.eta0);
  policy.form = parse_lr_form(cfg.personalization.form);
  policy.eta_min = cfg.personalization.eta_min;
  policy.eta_max = cfg.personalization.eta_max;
  if (cfg.personalization.clamp_to_bound) policy.ceiling = problem.lr_bound;
  try {
    policy.validate();
  } catch (const Error& e) {
    throw ConfigError("personalization", e.what());
  }
  const SignalKind signal = parse_signal_kind(cfg.personalization.signal);
  const Normalization norm = parse_normalization(cfg.personalization.normalization);

  RoundOptions options;
  options.local.H = cfg.H;
  options.local.zoo = ZooConfig{cfg.mu, cfg.perturbations};
  options.local.batch_size = cfg.batch_size;
  options.local.optimizer = parse_optimizer_kind(cfg.optimizer);
  options.local.restore = cfg.restore == "snapshot" ? RestoreMode::kSnapshot : RestoreMode::kInPlace;
  options.workers = overrides.workers.value_or(cfg.workers > 0 ? cfg.workers : workers_from_env());
  options.execution_order = overrides.execution_order;
  options.bytes_per_param = cfg.bytes_per_param;
  const ObjectiveHandle eval_obj = problem.eval_objective;
  const Batch eval_batch = problem.eval_batch;
  options.evaluate = [eval_obj, eval_batch](std::span<const double> params) {
    return eval_obj->loss(params, eval_batch);
  };

  RunResult result;
  std::vector<double> initial;
  std::vector<double> finals;
  std::vector<double> best;
  json rounds_run = json::array();
  json failures = json::array();
  for (std::size_t r = 0; r < cfg.replicates; ++r) {
    ReplicateTrace trace;
    trace.master_seed = replicate_seed(cfg.seed, r);
    ServerState server{problem.init, 0, trace.master_seed};
    std::vector<ClientState> clients(cfg.N);
    for (std::size_t i = 0; i < cfg.N; ++i) {
      clients[i].id = i;
      clients[i].objective = problem.clients[i];
      if (!problem.shards.empty()) clients[i].shard = problem.shards[i];
      clients[i].eta = problem.eta0;
    }
    PersonalizedRates strategy(signal, policy, norm);
    CommLedger ledger(problem.init.size(), cfg.bytes_per_param);

    const double l0 = options.evaluate(server.global);
    trace.eval_loss.push_back(l0);
    trace.train_loss.emplace_back();
    trace.eta.emplace_back();
    metrics.write({{"replicate", r},
                   {"seed", trace.master_seed},
                   {"round", 0},
                   {"eval_loss", l0},
                   {"train_loss", json::array()},
                   {"eta", json::array()},
                   {"phi", json::array()},
                   {"failed", json::array()},
                   {"bytes_cumulative", 0}});
    double best_loss = l0;
    std::size_t since_best = 0;
    for (std::size_t t = 1; t <= cfg.T; ++t) {
      const std::uint64_t allocs_before = DenseVector::allocation_count();
      RoundRecord rec;
      try {
        rec = run_round(server, clients, options, &strategy);
      } catch (const Error& e) {
        trace.failed = true;
        trace.error = e.what();
        break;
      }
      ledger.record_round(cfg.N);
      trace.eval_loss.push_back(rec.eval_loss);
      trace.train_loss.push_back(rec.train_loss);
      trace.eta.push_back(rec.eta);
      metrics.write({{"replicate", r},
                     {"seed", trace.master_seed},
                     {"round", rec.round},
                     {"eval_loss", std::isfinite(rec.eval_loss) ? json(rec.eval_loss) : json()},
                     {"train_loss", rec.train_loss},
                     {"eta", rec.eta},
                     {"phi", rec.phi},
                     {"failed", rec.failed},
                     {"bytes_cumulative", ledger.cumulative()}});
      timing.write({{"replicate", r},
                    {"round", rec.round},
                    {"wall_ms", rec.elapsed_ms},
                    {"dense_allocations", DenseVector::allocation_count() - allocs_before}});
      if (!std::isfinite(rec.eval_loss)) {
        trace.failed = true;
        trace.error = "global eval loss is not finite";
        break;
      }
      if (rec.eval_loss < best_loss) {
        best_loss = rec.eval_loss;
        since_best = 0;
      } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
        break;
      }
    }
    trace.final_params = server.global;
    initial.push_back(l0);
    finals.push_back(trace.eval_loss.back());
    best.push_back(*std::min_element(trace.eval_loss.begin(), trace.eval_loss.end()));
    rounds_run.push_back(trace.eval_loss.size() - 1);
    if (trace.failed) {
      result.ok = false;
      failures.push_back({{"replicate", r}, {"error", trace.error}});
    }
    result.replicates.push_back(std::move(trace));
  }

  result.summary = {{"replicates", cfg.replicates},
                    {"objective", cfg.objective.kind},
                    {"optimizer", cfg.optimizer},
                    {"trainable_params", problem.init.size()},
                    {"lr", problem.eta0},
                    {"lr_bound", problem.lr_bound},
                    {"L", problem.L},
                    {"c_g", problem.c_g},
                    {"sigma_g_sq", problem.sigma_g_sq},
                    {"f_star", problem.f_star ? json(*problem.f_star) : json()},
                    {"bytes_up_per_round", cfg.N * comm_cost(problem.init.size(), cfg.bytes_per_param)},
                    {"initial_eval_loss", stats(initial)},
                    {"final_eval_loss", stats(finals)},
                    {"best_eval_loss", stats(best)},
                    {"rounds_run", rounds_run},
                    {"failures", failures},
                    {"warnings", cfg.warnings}};
  if (overrides.write_files) write_json(dir / "summary.json", result.summary);
  return result;
}

json diagnose(ExperimentConfig cfg) {
  Problem p = build_problem(cfg);
  const std::size_t d = p.init.size();
  json measured;
  double r = 1.0;
  if (d <= 256) {
    const double eff = effective_rank(hessian_of(*p.train_objective, p.init));
    r = static_cast<double>(rank_for_rates(eff));
    measured["effective_rank"] = eff;
  } else {
    measured["effective_rank"] = nullptr;
    measured["effective_rank_note"] = "dimension above 256; r set to 1";
  }
  double c_h = 0.0;
  double sigma_h_sq = 0.0;
  try {
    ProbeOptions probes;
    probes.probes = 20;
    probes.center = p.init;
    probes.scale = cfg.objective.kind == "mlp-lora" ? 0.1 : 1.0;
    probes.seed = cfg.seed;
    const auto fit = estimate_heterogeneity_constants(p.clients, probes);
    c_h = fit.c_h;
    sigma_h_sq = fit.sigma_h_sq;
  } catch (const Error& e) {
    measured["heterogeneity_note"] = e.what();
  }
  TheoryInputs in;
  in.d = static_cast<double>(std::max<std::size_t>(d, 2));
  in.r = r;
  in.n = static_cast<double>(cfg.perturbations);
  in.N = static_cast<double>(cfg.N);
  in.H = static_cast<double>(cfg.H);
  in.T = static_cast<double>(std::max<std::size_t>(cfg.T, 1));
  in.L = p.L;
  in.c_g = p.c_g;
  in.sigma_g = std::sqrt(p.sigma_g_sq);
  in.c_h = c_h;
  in.sigma_h = std::sqrt(sigma_h_sq);
  in.mu = cfg.mu;
  in.f0 = p.train_objective->loss(p.init, p.train_objective->full_batch());
  in.f_star = p.f_star.value_or(0.0);
  if (in.f_star > in.f0) in.f_star = in.f0;
  json report = theory_report(in, p.eta0);
  measured["L"] = p.L;
  measured["c_g"] = p.c_g;
  measured["sigma_g_sq"] = p.sigma_g_sq;
  measured["c_h"] = c_h;
  measured["sigma_h_sq"] = sigma_h_sq;
  measured["f_star_known"] = p.f_star.has_value();
  report["measured"] = measured;
  report["warnings"] = cfg.warnings;
  return report;
}

}  // namespace fedmezo
