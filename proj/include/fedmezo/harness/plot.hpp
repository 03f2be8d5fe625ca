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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fedmezo {

struct BandRow {
  std::size_t round = 0;
  std::string series;
  double mean = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;
};

// Mean and two-sided 90% Student-t interval of the mean; one value gives a
// zero-width band.
BandRow band_of(std::size_t round, const std::string& series, std::span<const double> values);

// Reads <dir>/metrics.jsonl (series eval_loss and train_loss, the latter
// averaged over clients) or, for a sweep directory, every
// <dir>/<cell>/metrics.jsonl (one eval_loss series per cell). Writes
// <dir>/plot.csv with columns round,series,mean,band_lo,band_hi and returns
// the rows for rounds 1..T (the round-0 evaluation is skipped). Throws when no
// metrics are found.
std::vector<BandRow> emit_plot_data(const std::filesystem::path& dir);

}  // namespace fedmezo
