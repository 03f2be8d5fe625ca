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

#include "fedmezo/harness/plot.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>

#include "fedmezo/core/error.hpp"
#include "json.hpp"

namespace fedmezo {

BandRow band_of(std::size_t round, const std::string& series, std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "band needs at least one value");
  BandRow row;
  row.round = round;
  row.series = series;
  const double n = static_cast<double>(values.size());
  row.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  row.band_lo = row.band_hi = row.mean;
  if (values.size() >= 2) {
    double acc = 0.0;
    for (double v : values) acc += (v - row.mean) * (v - row.mean);
    const double se = std::sqrt(acc / (n - 1.0)) / std::sqrt(n);
    const boost::math::students_t dist(n - 1.0);
    const double t = boost::math::quantile(dist, 0.95);
    row.band_lo = row.mean - t * se;
    row.band_hi = row.mean + t * se;
  }
  return row;
}

namespace {

// series -> round -> replicate values
using Table = std::map<std::string, std::map<std::size_t, std::vector<double>>>;

void read_metrics(const std::filesystem::path& file, const std::string& eval_series,
                  const std::string& train_series, Table& table) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + file.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::kIo, file.string() + ": malformed metrics line");
    }
    const std::size_t round = row.at("round").get<std::size_t>();
    if (round == 0) continue;  // pre-training evaluation; not a training round
    if (row.contains("eval_loss") && row["eval_loss"].is_number()) {
      table[eval_series][round].push_back(row["eval_loss"].get<double>());
    }
    if (!train_series.empty() && row.contains("train_loss") && row["train_loss"].is_array() &&
        !row["train_loss"].empty()) {
      const auto losses = row["train_loss"].get<std::vector<double>>();
      table[train_series][round].push_back(std::accumulate(losses.begin(), losses.end(), 0.0) /
                                           static_cast<double>(losses.size()));
    }
  }
}

}  // namespace

std::vector<BandRow> emit_plot_data(const std::filesystem::path& dir) {
  Table table;
  if (std::filesystem::exists(dir / "metrics.jsonl")) {
    read_metrics(dir / "metrics.jsonl", "eval_loss", "train_loss", table);
  } else if (std::filesystem::is_directory(dir)) {
    std::vector<std::filesystem::path> cells;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.is_directory() && std::filesystem::exists(entry.path() / "metrics.jsonl")) {
        cells.push_back(entry.path());
      }
    }
    std::sort(cells.begin(), cells.end());
    for (const auto& cell : cells) {
      read_metrics(cell / "metrics.jsonl", cell.filename().string(), "", table);
    }
  }
  if (table.empty()) throw Error(ErrorCode::kIo, "no metrics found under " + dir.string());

  std::vector<BandRow> rows;
  for (const auto& [series, by_round] : table) {
    for (const auto& [round, values] : by_round) rows.push_back(band_of(round, series, values));
  }
  std::sort(rows.begin(), rows.end(), [](const BandRow& a, const BandRow& b) {
    return a.round != b.round ? a.round < b.round : a.series < b.series;
  });
  std::ofstream out(dir / "plot.csv", std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / "plot.csv").string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "round,series,mean,band_lo,band_hi\n";
  for (const auto& r : rows) {
    out << r.round << ',' << r.series << ',' << r.mean << ',' << r.band_lo << ',' << r.band_hi << '\n';
  }
  return rows;
}

}  // namespace fedmezo
