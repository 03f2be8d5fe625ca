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

#include "fedmezo/harness/verify.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "fedmezo/core/error.hpp"
#include "fedmezo/core/rng.hpp"
#include "fedmezo/diagnostics/theory.hpp"
#include "fedmezo/federation/comm.hpp"
#include "fedmezo/harness/experiment.hpp"
#include "fedmezo/objectives/quadratic.hpp"
#include "fedmezo/zoo/zoo.hpp"

namespace fedmezo {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool close(double measured, double expected, double rel) {
  return std::abs(measured - expected) <= rel * std::max(std::abs(expected), 1e-300);
}

// Records one check; any exception (including a missing golden key) fails it.
void check(std::vector<CheckResult>& out, const std::string& name,
           const std::function<bool(std::string&)>& body) {
  CheckResult r;
  r.name = name;
  try {
    r.pass = body(r.detail);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("error: ") + e.what();
  }
  out.push_back(std::move(r));
}

TheoryInputs inputs_from(const json& j) {
  TheoryInputs in;
  in.d = j.at("d");
  in.r = j.at("r");
  in.n = j.at("n");
  in.N = j.at("N");
  in.H = j.at("H");
  in.T = j.at("T");
  in.L = j.at("L");
  in.c_g = j.at("c_g");
  in.sigma_g = j.at("sigma_g");
  in.c_h = j.at("c_h");
  in.sigma_h = j.at("sigma_h");
  in.mu = j.at("mu");
  in.f0 = j.at("f0");
  in.f_star = j.at("f_star");
  return in;
}

// d = 10 quadratic with A = diag(linspace(0.5, 2)), theta chosen so that
// ||grad f|| = 5.
struct UnbiasProblem {
  std::shared_ptr<QuadraticObjective> obj;
  DenseVector theta;
  DenseVector grad;
};

UnbiasProblem unbias_problem() {
  const auto spectrum = linspace(0.5, 2.0, 10);
  DenseVector optimum(10);
  auto obj = std::make_shared<QuadraticObjective>(
      QuadraticSpec{DenseMatrix::diagonal(spectrum), optimum, 0.0, {}});
  SeedStream s(salted_seed(7, 1));
  DenseVector dir = sample_gaussian(s, 10);
  DenseVector g0 = obj->gradient(dir, obj->full_batch());
  dir *= 5.0 / g0.norm();
  DenseVector grad = obj->gradient(dir, obj->full_batch());
  return {obj, dir, grad};
}

}  // namespace

std::vector<CheckResult> run_verify(const std::filesystem::path& goldens_path) {
  json g;
  {
    std::ifstream in(goldens_path);
    if (in) {
      try {
        g = json::parse(in);
      } catch (const json::exception&) {
        g = json::object();
      }
    } else {
      g = json::object();
    }
  }
  std::vector<CheckResult> out;

  check(out, "derive_seed golden", [&](std::string& d) {
    bool ok = true;
    for (const auto& e : g.at("derive_seed")) {
      const std::uint64_t want = std::stoull(e.at("value").get<std::string>());
      const std::uint64_t got = derive_seed(RngRecipe{e.at("master"), e.at("round"), e.at("client"), e.at("step")});
      d += std::to_string(got) + " vs " + std::to_string(want) + "; ";
      ok = ok && got == want;
    }
    return ok;
  });

  check(out, "gamma_zeta golden", [&](std::string& d) {
    bool ok = true;
    for (const auto& e : g.at("gamma_zeta")) {
      const auto gz = gamma_zeta(e.at("d"), e.at("r"), e.at("n"));
      d += fmt(gz.gamma) + "," + fmt(gz.zeta) + "; ";
      ok = ok && close(gz.gamma, e.at("gamma"), 1e-12) && close(gz.zeta, e.at("zeta"), 1e-12);
    }
    return ok;
  });

  check(out, "gamma*zeta identity", [&](std::string& d) {
    SeedStream s(salted_seed(11, 2));
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const double dd = 2.0 + static_cast<double>(s.next_below(5000));
      const double r = 1.0 + static_cast<double>(s.next_below(64));
      const double n = 1.0 + static_cast<double>(s.next_below(8));
      const auto gz = gamma_zeta(dd, r, n);
      const double want = n / (dd + n - 1.0);
      worst = std::max(worst, std::abs(gz.gamma * gz.zeta - want) / want);
    }
    d = "max rel err " + fmt(worst);
    return worst <= 1e-12;
  });

  check(out, "lr_bound golden", [&](std::string& d) {
    bool ok = true;
    for (const auto& e : g.at("lr_bound")) {
      const double v = lr_bound(e.at("H"), e.at("L"), e.at("c_g"), e.at("d"), e.at("N"));
      d += fmt(v) + "; ";
      ok = ok && close(v, e.at("value"), 1e-12);
    }
    return ok;
  });

  check(out, "iid_rate_bound golden", [&](std::string& d) {
    const auto& e = g.at("iid_rate_bound");
    const double v = iid_rate_bound(inputs_from(e.at("inputs")), e.at("eta"));
    d = fmt(v) + " vs " + fmt(e.at("value"));
    return close(v, e.at("value"), 1e-12);
  });

  check(out, "noniid_rate_bound golden", [&](std::string& d) {
    const auto& e = g.at("noniid_rate_bound");
    const double v = noniid_rate_bound(inputs_from(e.at("inputs")), e.at("eta"));
    d = fmt(v) + " vs " + fmt(e.at("value"));
    return close(v, e.at("value"), 1e-12);
  });

  check(out, "rate_scaling golden", [&](std::string& d) {
    bool ok = true;
    for (const auto& e : g.at("rate_scaling")) {
      std::optional<double> cht;
      if (e.contains("c_h_tilde")) cht = e.at("c_h_tilde").get<double>();
      const double v = rate_scaling(e.at("r"), e.at("N"), e.at("H"), e.at("T"), cht);
      d += fmt(v) + "; ";
      ok = ok && close(v, e.at("value"), 1e-12);
    }
    return ok;
  });

  check(out, "comm_cost golden", [&](std::string& d) {
    const auto& e = g.at("comm_cost");
    const std::uint64_t bpp = e.at("bytes_per_param");
    const std::uint64_t lora = comm_cost(e.at("lora_params"), bpp);
    const std::uint64_t count = back_derive_param_count(e.at("quoted_full_gib"), bpp);
    const double full_gib = to_gib(comm_cost(count, bpp));
    d = std::to_string(lora) + " B (" + format_bytes(lora) + "); back-derived " + std::to_string(count) +
        " params -> " + format_bytes(comm_cost(count, bpp));
    return lora == e.at("lora_bytes").get<std::uint64_t>() && close(to_mib(lora), e.at("lora_mib"), 1e-12) &&
           count == e.at("full_params_back_derived").get<std::uint64_t>() &&
           close(full_gib, e.at("full_gib_from_back_derived"), 1e-12) &&
           format_bytes(comm_cost(count, bpp)) == "6.39 GiB";
  });

  check(out, "two-point estimator unbiased (2e5 samples, 2%)", [&](std::string& d) {
    const auto p = unbias_problem();
    const Batch b = p.obj->full_batch();
    DenseVector mean(10);
    const std::size_t K = 200000;
    for (std::size_t k = 0; k < K; ++k) {
      mean += two_point_estimate(*p.obj, p.theta, b, ZooConfig{1e-3, 1}, derive_seed(RngRecipe{99, 0, 0, k})).e;
    }
    mean *= 1.0 / static_cast<double>(K);
    const double rel = (mean - p.grad).norm() / p.grad.norm();
    d = "rel err " + fmt(rel);
    return rel <= 0.02;
  });

  check(out, "second moment (d+2)||g||^2 (1e6 samples, 5%)", [&](std::string& d) {
    const auto p = unbias_problem();
    const auto m = estimator_second_moment(*p.obj, p.theta, p.obj->full_batch(), ZooConfig{1e-3, 1}, 1000000, 5);
    const double want = 12.0 * 25.0;
    d = fmt(m.value) + " vs " + fmt(want);
    return std::abs(m.value - want) <= 0.05 * want;
  });

  check(out, "in-place vs snapshot parity, zero allocations", [&](std::string& d) {
    const auto p = unbias_problem();
    const Batch b = p.obj->full_batch();
    DenseVector a = p.theta;
    DenseVector s = p.theta;
    const ZooConfig cfg{1e-3, 1};
    std::uint64_t allocs = 0;
    double worst = 0.0;
    for (std::size_t k = 0; k < 1000; ++k) {
      const std::uint64_t seed = derive_seed(RngRecipe{3, 0, 0, k});
      const std::uint64_t before = DenseVector::allocation_count();
      mezo_step_inplace(*p.obj, a.span(), b, cfg, 0.01, seed, RestoreMode::kInPlace);
      allocs += DenseVector::allocation_count() - before;
      mezo_step_inplace(*p.obj, s.span(), b, cfg, 0.01, seed, RestoreMode::kSnapshot);
      for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - s[i]) / std::max(std::abs(s[i]), 1e-300));
      }
    }
    d = "allocations " + std::to_string(allocs) + ", max rel diff " + fmt(worst);
    return allocs == 0 && worst <= 1e-9;
  });

  check(out, "run determinism and order independence", [&](std::string& d) {
    ExperimentConfig cfg;
    cfg.objective.kind = "quadratic";
    cfg.objective.dim = 8;
    cfg.objective.spectrum = {0.5, 1.0};
    cfg.objective.shift_scale = 0.3;
    cfg.N = 3;
    cfg.T = 5;
    cfg.H = 4;
    cfg.personalization.signal = "update-norm";
    RunOverrides ov;
    ov.write_files = false;
    const auto r1 = run_experiment(cfg, ov);
    const auto r2 = run_experiment(cfg, ov);
    ov.execution_order = {2, 0, 1};
    const auto r3 = run_experiment(cfg, ov);
    const bool same = r1.replicates[0].eval_loss == r2.replicates[0].eval_loss &&
                      r1.replicates[0].eval_loss == r3.replicates[0].eval_loss &&
                      r1.replicates[0].final_params == r3.replicates[0].final_params;
    d = same ? "identical traces" : "traces differ";
    return same;
  });

  return out;
}

json to_json(const std::vector<CheckResult>& checks) {
  json arr = json::array();
  bool all = true;
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    all = all && c.pass;
  }
  return {{"checks", arr}, {"all_passed", all}};
}

}  // namespace fedmezo
