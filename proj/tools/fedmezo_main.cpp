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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedmezo/core/error.hpp"
#include "fedmezo/harness/config.hpp"
#include "fedmezo/harness/experiment.hpp"
#include "fedmezo/harness/plot.hpp"
#include "fedmezo/harness/sweep.hpp"
#include "fedmezo/harness/verify.hpp"

#ifndef FEDMEZO_GOLDENS
#define FEDMEZO_GOLDENS "data/goldens.json"
#endif

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfigError = 2;

int cmd_run(const std::string& path, std::optional<std::size_t> workers) {
  auto cfg = fedmezo::load_config(path);
  fedmezo::RunOverrides ov;
  ov.workers = workers;
  const auto result = fedmezo::run_experiment(cfg, ov);
  for (const auto& w : result.summary.value("warnings", nlohmann::json::array())) {
    std::cerr << "warning: " << w.get<std::string>() << "\n";
  }
  std::cout << result.summary.dump(2) << "\n";
  return result.ok ? kOk : kFailure;
}

int cmd_sweep(const std::string& path, const std::string& axis, const std::vector<std::string>& values) {
  const auto cfg = fedmezo::load_config(path);
  const auto result = fedmezo::sweep(cfg, axis, values);
  std::cout << result.summary.dump(2) << "\n";
  std::cerr << "wrote " << result.csv.string() << "\n";
  return result.ok ? kOk : kFailure;
}

int cmd_diagnose(const std::string& path) {
  const auto cfg = fedmezo::load_config(path);
  std::cout << fedmezo::diagnose(cfg).dump(2) << "\n";
  return kOk;
}

int cmd_verify(const std::string& goldens, bool as_json) {
  const auto checks = fedmezo::run_verify(goldens);
  bool all = true;
  for (const auto& c : checks) all = all && c.pass;
  if (as_json) {
    std::cout << fedmezo::to_json(checks).dump(2) << "\n";
  } else {
    for (const auto& c : checks) {
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " | " << c.detail << "\n";
    }
    std::cout << (all ? "all checks passed" : "some checks failed") << "\n";
  }
  return all ? kOk : kFailure;
}

int cmd_plot(const std::string& dir) {
  const auto rows = fedmezo::emit_plot_data(dir);
  std::cout << "wrote " << (std::filesystem::path(dir) / "plot.csv").string() << " (" << rows.size()
            << " rows)\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated zeroth-order fine-tuning simulator"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::size_t> workers;
  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("config", config, "Experiment config (JSON)")->required();
  run->add_option("--workers", workers, "Client worker threads (overrides FEDMEZO_WORKERS)");

  std::string axis;
  std::vector<std::string> values;
  auto* sw = app.add_subcommand("sweep", "Run one experiment per axis value");
  sw->add_option("config", config, "Experiment config (JSON)")->required();
  sw->add_option("--axis", axis, "mu | H | N | splitter | lr | strategy")->required();
  sw->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');

  auto* diag = app.add_subcommand("diagnose", "Theory constants and measured problem constants");
  diag->add_option("config", config, "Experiment config (JSON)")->required();

  std::string goldens = FEDMEZO_GOLDENS;
  bool as_json = false;
  auto* ver = app.add_subcommand("verify", "Run the oracle check suite");
  ver->add_option("--goldens", goldens, "Golden values file");
  ver->add_flag("--json", as_json, "Print the report as JSON");

  std::string dir;
  auto* plot = app.add_subcommand("plot", "Write plot.csv with mean and 90% bands");
  plot->add_option("dir", dir, "Run or sweep output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(config, workers);
    if (*sw) return cmd_sweep(config, axis, values);
    if (*diag) return cmd_diagnose(config);
    if (*ver) return cmd_verify(goldens, as_json);
    if (*plot) return cmd_plot(dir);
  } catch (const fedmezo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const fedmezo::Error& e) {
    std::cerr << "error (" << fedmezo::to_string(e.code()) << "): " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
