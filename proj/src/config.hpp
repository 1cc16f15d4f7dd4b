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


// Experiment configuration: a versioned JSON document.
//
//   {
//     "schema": "pigps.experiment/1",
//     "name": "...",
//     "task": {"kind": "point_mass" | "latch", "point_mass": {...},
//              "latch": {...}, "instances": {...}},
//     "gps": {...},
//     "evaluation": {"n_eval": 30, "seed": 12345, "every": 0, "policy": "global"},
//     "output": {"dir": "...", "checkpoint_every": 0},
//     "seeds": [1, 2, 3]
//   }
//
// Every top-level section is required. Keys omitted inside a section take
// their defaults; unknown keys are errors.

#ifndef PIGPS_CONFIG_HPP_
#define PIGPS_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "envs.hpp"
#include "gps_loop.hpp"

namespace pigps {

inline constexpr const char* kExperimentSchema = "pigps.experiment/1";

struct OutputConfig {
  std::string dir = "runs/experiment";
  int checkpoint_every = 0;  // 0 = final checkpoint only

  bool operator==(const OutputConfig&) const = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  TaskSpec task;
  GpsConfig gps;  // gps.seed is replaced by each entry of `seeds`
  EvalProtocol evaluation;
  OutputConfig output;
  std::vector<uint64_t> seeds{1};

  bool operator==(const ExperimentConfig&) const = default;
};

InstanceDistribution DefaultInstances(TaskKind kind);

// Throws Error(kConfig) whose message lists every violation.
ExperimentConfig ParseExperiment(const nlohmann::json& doc);
ExperimentConfig ParseExperimentText(const std::string& text);
ExperimentConfig LoadExperiment(const std::string& path);

nlohmann::json ToJson(const ExperimentConfig& config);
std::string SerializeExperiment(const ExperimentConfig& config);

// "a.b.c=value": value is parsed as JSON when possible, else taken as a
// string. Intermediate objects are created as needed.
void ApplyOverride(nlohmann::json& doc, const std::string& assignment);

}  // namespace pigps

#endif  // PIGPS_CONFIG_HPP_
