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


#include "harness.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "checkpoint.hpp"

namespace pigps {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string Fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvFile {
 public:
  CsvFile(const fs::path& path, const char* header) : path_(path.string()) {
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw Error(ErrorCode::kIo, "cannot open '" + path_ + "' for writing");
    Line(header);
  }

  void Line(const std::string& line) {
    out_ << line << '\n';
    out_.flush();
    if (!out_) throw Error(ErrorCode::kIo, "write to '" + path_ + "' failed");
  }

 private:
  std::string path_;
  std::ofstream out_;
};

void MakeDirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create '" + dir.string() + "': " + ec.message());
}

json EvalJson(const EvalResult& e) {
  return {{"success_rate", e.success_rate}, {"mean_cost", e.mean_cost}};
}

json Summary(const ExperimentConfig& config, uint64_t seed, const SeedRun& run,
             const std::string& status, const std::string& error) {
  json iterations = json::array();
  json evals = json::array();
  for (const IterationRecord& r : run.records) {
    iterations.push_back({{"iteration", r.iteration},
                          {"phase", r.phase},
                          {"mean_cost", r.MeanCost()},
                          {"success_rate", r.SuccessRate()}});
    if (r.eval) {
      json e = EvalJson(*r.eval);
      e["iteration"] = r.iteration;
      evals.push_back(std::move(e));
    }
  }
  json doc = {{"schema", kSummarySchema},
              {"name", config.name},
              {"seed", seed},
              {"status", status},
              {"task", ToString(config.task.kind)},
              {"horizon", config.task.horizon()},
              {"algorithm", ToString(config.gps.algorithm)},
              {"optimizer", ToString(config.gps.optimizer)},
              {"evaluation",
               {{"n_eval", config.evaluation.n_eval},
                {"seed", config.evaluation.seed},
                {"policy", config.evaluation.local ? "local" : "global"}}},
              {"iterations", iterations},
              {"evals", evals},
              {"final_eval", run.final_eval ? EvalJson(*run.final_eval) : json(nullptr)}};
  if (!error.empty()) doc["error"] = error;
  return doc;
}

std::string CheckpointName(const char* prefix, int iteration) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04d.json", prefix, iteration);
  return buf;
}

}  // namespace

std::string SeedDirectory(const std::string& out_dir, uint64_t seed) {
  return (fs::path(out_dir) / ("seed_" + std::to_string(seed))).string();
}

std::string MetricsRow(int iteration, const InstanceRecord& r) {
  return std::to_string(iteration) + "," + std::to_string(r.instance_id) + "," +
         Fmt(r.mean_cost) + "," + Fmt(r.success_rate) + "," + Fmt(r.min_eta) + "," +
         Fmt(r.max_eta) + "," + Fmt(r.kl_to_global);
}

SeedRun RunSeed(const ExperimentConfig& config, uint64_t seed, const std::string& dir) {
  const fs::path root(dir);
  const fs::path checkpoints = root / "checkpoints";
  MakeDirs(checkpoints);
  CsvFile metrics(root / "metrics.csv", kMetricsHeader);
  CsvFile evals(root / "eval.csv", "iteration,success_rate,mean_cost");
  CsvFile timing(root / "timing.csv", "iteration,wall_clock_seconds");

  GpsConfig gps = config.gps;
  gps.seed = seed;
  SeedRun run;
  run.seed = seed;
  run.dir = dir;

  const int total = gps.local_iterations + gps.global_iterations;
  auto on_iteration = [&](const GpsState& state, const IterationRecord& record) {
    for (const InstanceRecord& r : record.instances) metrics.Line(MetricsRow(record.iteration, r));
    timing.Line(std::to_string(record.iteration) + "," + Fmt(record.wall_clock_seconds));
    if (record.eval) {
      evals.Line(std::to_string(record.iteration) + "," + Fmt(record.eval->success_rate) + "," +
                 Fmt(record.eval->mean_cost));
    }
    const int every = config.output.checkpoint_every;
    if (record.iteration == total || (every > 0 && record.iteration % every == 0)) {
      SaveJson(ToJson(state.global), (checkpoints / CheckpointName("global", record.iteration)).string());
      for (std::size_t m = 0; m < state.locals.size(); ++m) {
        const std::string name = "local" + std::to_string(m);
        SaveJson(ToJson(state.locals[m]),
                 (checkpoints / CheckpointName(name.c_str(), record.iteration)).string());
      }
    }
    run.records.push_back(record);
  };

  try {
    // With no iterations configured nothing is trained, not even the
    // scripted initialization.
    if (total > 0) {
      RunGps(config.task, gps, config.evaluation, on_iteration);
      for (auto it = run.records.rbegin(); it != run.records.rend(); ++it) {
        if (it->eval) {
          run.final_eval = it->eval;
          break;
        }
      }
    }
  } catch (const std::exception& e) {
    SaveJson(Summary(config, seed, run, "failed", e.what()), (root / "summary.json").string());
    throw;
  }
  SaveJson(Summary(config, seed, run, "complete", ""), (root / "summary.json").string());
  return run;
}

std::vector<SeedRun> RunExperiment(const ExperimentConfig& config) {
  MakeDirs(config.output.dir);
  {
    std::ofstream out(fs::path(config.output.dir) / "config.json", std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write config.json in '" + config.output.dir + "'");
    out << SerializeExperiment(config);
  }
  std::vector<SeedRun> runs;
  for (uint64_t seed : config.seeds) {
    runs.push_back(RunSeed(config, seed, SeedDirectory(config.output.dir, seed)));
  }
  return runs;
}

EvalResult EvaluatePolicy(const StochasticPolicy& policy, const ExperimentConfig& config) {
  if (policy.state_dim() != config.task.state_dim() ||
      policy.action_dim() != config.task.action_dim() ||
      policy.horizon() != config.task.horizon()) {
    throw Error(ErrorCode::kConfig,
                "policy dimensions (state " + std::to_string(policy.state_dim()) + ", action " +
                    std::to_string(policy.action_dim()) + ", horizon " +
                    std::to_string(policy.horizon()) + ") do not match the configured task");
  }
  return Evaluate(policy, config.task, config.task.instances, config.evaluation.n_eval,
                  config.evaluation.seed);
}

}  // namespace pigps
