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


#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "checkpoint.hpp"
#include "common.hpp"
#include "harness.hpp"

namespace pigps {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Costs closer than this are reported as ties.
constexpr double kTieTolerance = 1e-12;

struct Run {
  std::string label;
  std::string dir;
  int horizon = 0;
  json evaluation;
  std::vector<SeedCurve> seeds;
};

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream in(line);
  std::string field;
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

double ParseDouble(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kConfig, where + ": '" + text + "' is not a number");
}

std::vector<fs::path> SeedDirs(const fs::path& dir) {
  if (fs::exists(dir / "summary.json")) return {dir};
  std::vector<fs::path> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_directory() && entry.path().filename().string().rfind("seed_", 0) == 0 &&
        fs::exists(entry.path() / "summary.json")) {
      out.push_back(entry.path());
    }
  }
  if (ec) throw Error(ErrorCode::kIo, "cannot read '" + dir.string() + "': " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

Run ReadRun(const std::string& dir) {
  const std::vector<fs::path> seeds = SeedDirs(dir);
  if (seeds.empty()) throw Error(ErrorCode::kIo, "'" + dir + "' holds no completed runs");
  Run run;
  run.dir = dir;
  for (const fs::path& seed_dir : seeds) {
    const json summary = LoadJson((seed_dir / "summary.json").string());
    if (summary.value("schema", "") != kSummarySchema) {
      throw Error(ErrorCode::kConfig, (seed_dir / "summary.json").string() + ": not a run summary");
    }
    if (summary.value("status", "") != "complete") {
      throw Error(ErrorCode::kConfig, seed_dir.string() + ": run did not complete");
    }
    const std::string label = summary.at("name");
    const int horizon = summary.at("horizon");
    const json& evaluation = summary.at("evaluation");
    if (run.seeds.empty()) {
      run.label = label;
      run.horizon = horizon;
      run.evaluation = evaluation;
    } else if (label != run.label || horizon != run.horizon || evaluation != run.evaluation) {
      throw Error(ErrorCode::kConfig, "seeds under '" + dir + "' come from different experiments");
    }
    run.seeds.push_back(ReadMetrics((seed_dir / "metrics.csv").string(), summary.at("seed")));
  }
  return run;
}

// Iterations present in every seed, ascending.
std::vector<int> CommonIterations(const Run& run) {
  std::vector<int> common = run.seeds.front().iterations;
  for (const SeedCurve& s : run.seeds) {
    std::vector<int> next;
    std::set_intersection(common.begin(), common.end(), s.iterations.begin(), s.iterations.end(),
                          std::back_inserter(next));
    common = std::move(next);
  }
  return common;
}

double ValueAt(const SeedCurve& s, const std::vector<double>& values, int iteration) {
  const auto it = std::lower_bound(s.iterations.begin(), s.iterations.end(), iteration);
  return values[static_cast<std::size_t>(it - s.iterations.begin())];
}

std::vector<std::string> Argmin(const std::vector<std::string>& labels,
                                const std::vector<double>& values) {
  std::vector<std::string> out;
  if (values.empty()) return out;
  const double best = *std::min_element(values.begin(), values.end());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] <= best + kTieTolerance) out.push_back(labels[i]);
  }
  return out;
}

std::string Order(double a, double b) {
  if (std::abs(a - b) <= kTieTolerance) return "tie";
  return a < b ? "a" : "b";
}

}  // namespace

SeedCurve ReadMetrics(const std::string& path, uint64_t seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw Error(ErrorCode::kConfig, path + ": unexpected header");
  }
  std::map<int, std::pair<std::vector<double>, std::vector<double>>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = SplitCsv(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (fields.size() != 7) throw Error(ErrorCode::kConfig, where + ": expected 7 fields");
    const int iteration = static_cast<int>(ParseDouble(fields[0], where));
    rows[iteration].first.push_back(ParseDouble(fields[2], where));
    rows[iteration].second.push_back(ParseDouble(fields[3], where));
  }
  SeedCurve curve;
  curve.seed = seed;
  for (const auto& [iteration, values] : rows) {
    auto mean = [](const std::vector<double>& v) {
      double total = 0.0;
      for (double x : v) total += x;
      return total / static_cast<double>(v.size());
    };
    curve.iterations.push_back(iteration);
    curve.mean_cost.push_back(mean(values.first));
    curve.success_rate.push_back(mean(values.second));
  }
  return curve;
}

double Quantile(std::vector<double> values, double q) {
  if (values.empty()) ThrowInvalid("Quantile: no values");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

json Compare(const std::vector<std::string>& dirs) {
  if (dirs.empty()) ThrowInvalid("compare: no run directories given");
  std::vector<Run> runs;
  std::map<std::string, int> seen;
  for (const std::string& dir : dirs) {
    Run run = ReadRun(dir);
    const int count = ++seen[run.label];
    if (count > 1) run.label += "#" + std::to_string(count);
    if (!runs.empty()) {
      if (run.horizon != runs.front().horizon) {
        throw Error(ErrorCode::kConfig, "horizon of '" + dir + "' differs from '" + runs.front().dir + "'");
      }
      if (run.evaluation != runs.front().evaluation) {
        throw Error(ErrorCode::kConfig,
                    "evaluation protocol of '" + dir + "' differs from '" + runs.front().dir + "'");
      }
    }
    runs.push_back(std::move(run));
  }

  bool insufficient = false;
  json runs_json = json::array();
  std::vector<std::string> labels;
  std::vector<double> final_medians, best_medians;
  for (const Run& run : runs) {
    insufficient = insufficient || run.seeds.size() < 2;
    const std::vector<int> iterations = CommonIterations(run);
    json per_seed = json::array();
    for (const SeedCurve& s : run.seeds) {
      json cost = json::array(), success = json::array();
      for (int it : iterations) {
        cost.push_back(ValueAt(s, s.mean_cost, it));
        success.push_back(ValueAt(s, s.success_rate, it));
      }
      per_seed.push_back({{"seed", s.seed}, {"mean_cost", cost}, {"success_rate", success}});
    }
    json median_cost = json::array(), q1_cost = json::array(), q3_cost = json::array();
    json median_success = json::array(), q1_success = json::array(), q3_success = json::array();
    std::vector<double> medians;
    for (int it : iterations) {
      std::vector<double> cost, success;
      for (const SeedCurve& s : run.seeds) {
        cost.push_back(ValueAt(s, s.mean_cost, it));
        success.push_back(ValueAt(s, s.success_rate, it));
      }
      medians.push_back(Quantile(cost, 0.5));
      median_cost.push_back(medians.back());
      q1_cost.push_back(Quantile(cost, 0.25));
      q3_cost.push_back(Quantile(cost, 0.75));
      median_success.push_back(Quantile(success, 0.5));
      q1_success.push_back(Quantile(success, 0.25));
      q3_success.push_back(Quantile(success, 0.75));
    }
    json entry = {{"label", run.label},
                  {"dir", run.dir},
                  {"seeds", json::array()},
                  {"iterations", iterations},
                  {"per_seed", per_seed},
                  {"median_cost", median_cost},
                  {"q1_cost", q1_cost},
                  {"q3_cost", q3_cost},
                  {"median_success_rate", median_success},
                  {"q1_success_rate", q1_success},
                  {"q3_success_rate", q3_success}};
    for (const SeedCurve& s : run.seeds) entry["seeds"].push_back(s.seed);
    if (!medians.empty()) {
      const auto best = std::min_element(medians.begin(), medians.end());
      entry["final_iteration"] = iterations.back();
      entry["final_median_cost"] = medians.back();
      entry["best_median_cost"] = *best;
      entry["best_iteration"] = iterations[static_cast<std::size_t>(best - medians.begin())];
      labels.push_back(run.label);
      final_medians.push_back(medians.back());
      best_medians.push_back(*best);
    } else {
      entry["final_iteration"] = nullptr;
      entry["final_median_cost"] = nullptr;
      entry["best_median_cost"] = nullptr;
      entry["best_iteration"] = nullptr;
      insufficient = true;
    }
    runs_json.push_back(std::move(entry));
  }

  json report = {{"schema", kReportSchema},
                 {"horizon", runs.front().horizon},
                 {"evaluation", runs.front().evaluation},
                 {"insufficient_seeds", insufficient},
                 {"runs", runs_json}};
  if (insufficient) {
    report["verdicts"] = nullptr;
    return report;
  }
  json pairwise = json::array();
  for (std::size_t a = 0; a < labels.size(); ++a) {
    for (std::size_t b = a + 1; b < labels.size(); ++b) {
      pairwise.push_back({{"a", labels[a]},
                          {"b", labels[b]},
                          {"lower_final_median_cost", Order(final_medians[a], final_medians[b])},
                          {"lower_best_median_cost", Order(best_medians[a], best_medians[b])}});
    }
  }
  report["verdicts"] = {{"lowest_final_median_cost", Argmin(labels, final_medians)},
                        {"lowest_median_cost_any_iteration", Argmin(labels, best_medians)},
                        {"pairwise", pairwise}};
  return report;
}

}  // namespace pigps
