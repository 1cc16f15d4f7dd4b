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


// Experiment runner. For each seed s the output directory receives
//
//   seed_<s>/metrics.csv     one row per (iteration, instance)
//   seed_<s>/eval.csv        noiseless evaluations
//   seed_<s>/summary.json    per-iteration curves and the final evaluation
//   seed_<s>/timing.csv      wall-clock per iteration
//   seed_<s>/checkpoints/    policy checkpoints
//
// plus config.json with the resolved configuration. Everything except
// timing.csv is a deterministic function of the configuration.

#ifndef PIGPS_HARNESS_HPP_
#define PIGPS_HARNESS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "gps_loop.hpp"

namespace pigps {

inline constexpr const char* kSummarySchema = "pigps.summary/1";
inline constexpr const char* kMetricsHeader =
    "iteration,instance_id,mean_cost,success_rate,min_eta,max_eta,kl_to_global";

struct SeedRun {
  uint64_t seed = 0;
  std::string dir;
  std::vector<IterationRecord> records;
  std::optional<EvalResult> final_eval;
};

std::string SeedDirectory(const std::string& out_dir, uint64_t seed);

// Formats one metrics row (no trailing newline), doubles as %.17g.
std::string MetricsRow(int iteration, const InstanceRecord& record);

SeedRun RunSeed(const ExperimentConfig& config, uint64_t seed, const std::string& dir);
std::vector<SeedRun> RunExperiment(const ExperimentConfig& config);

// Noiseless evaluation of a checkpointed policy under the config's task and
// evaluation protocol.
EvalResult EvaluatePolicy(const StochasticPolicy& policy, const ExperimentConfig& config);

}  // namespace pigps

#endif  // PIGPS_HARNESS_HPP_
