// Copyright 2026 The PI-GPS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Cross-seed comparison of finished runs, computed from metrics.csv and
// summary.json alone.

#ifndef PIGPS_REPORT_HPP_
#define PIGPS_REPORT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace pigps {

inline constexpr const char* kReportSchema = "pigps.report/1";

// Per-iteration cost and success of one seed: means over the instance rows.
struct SeedCurve {
  uint64_t seed = 0;
  std::vector<int> iterations;
  std::vector<double> mean_cost;
  std::vector<double> success_rate;
};

// Parses a metrics.csv file into a curve.
SeedCurve ReadMetrics(const std::string& path, uint64_t seed);

// Linear-interpolation quantile (R type 7) of unsorted values.
double Quantile(std::vector<double> values, double q);

// `dirs` are experiment directories (holding seed_* subdirectories) or
// single-seed directories. Throws Error(kConfig) on mismatched horizons or
// evaluation protocols and Error(kIo) on unreadable runs.
nlohmann::json Compare(const std::vector<std::string>& dirs);

}  // namespace pigps

#endif  // PIGPS_REPORT_HPP_
