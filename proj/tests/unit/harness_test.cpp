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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "checkpoint.hpp"
#include "report.hpp"
#include "test_support.hpp"

namespace pigps {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ExperimentConfig Tiny(const std::string& dir) {
  ExperimentConfig c = ParseExperimentText(R"({
    "schema": "pigps.experiment/1",
    "name": "tiny",
    "task": {"kind": "point_mass", "point_mass": {"horizon": 15}},
    "gps": {"local_iterations": 1, "global_iterations": 2, "instances_per_iteration": 2,
            "samples_per_instance": 4, "hidden": [6, 6], "train": {"epochs": 2}},
    "evaluation": {"n_eval": 3, "seed": 5, "every": 2},
    "output": {"dir": "unused", "checkpoint_every": 2},
    "seeds": [1, 2]
  })");
  c.output.dir = dir;
  return c;
}

TEST(MetricsRowTest, FullPrecision) {
  const InstanceRecord r{3, 0.1, 0.5, 1e-4, 2.0, 1.0 / 3.0};
  EXPECT_EQ(MetricsRow(7, r), "7,3,0.10000000000000001,0.5,0.0001,2,0.33333333333333331");
}

TEST(RunExperimentTest, WritesArtifacts) {
  const std::string root = testing::ScratchDir("harness_run");
  const ExperimentConfig c = Tiny(root);
  const std::vector<SeedRun> runs = RunExperiment(c);
  ASSERT_EQ(runs.size(), 2u);
  EXPECT_EQ(ParseExperimentText(Slurp(fs::path(root) / "config.json")), c);

  const fs::path seed1 = SeedDirectory(root, 1);
  std::istringstream metrics(Slurp(seed1 / "metrics.csv"));
  std::string line;
  std::getline(metrics, line);
  EXPECT_EQ(line, kMetricsHeader);
  int rows = 0;
  while (std::getline(metrics, line)) ++rows;
  EXPECT_EQ(rows, 4 * 2);  // iterations 0..3, two instances each

  const json summary = LoadJson((seed1 / "summary.json").string());
  EXPECT_EQ(summary["status"], "complete");
  EXPECT_EQ(summary["iterations"].size(), 4u);
  EXPECT_EQ(summary["evals"].size(), 3u);  // iterations 0, 2 and 3
  ASSERT_TRUE(runs[0].final_eval.has_value());
  EXPECT_EQ(summary["final_eval"]["mean_cost"].get<double>(), runs[0].final_eval->mean_cost);

  for (const char* name : {"global_0000.json", "global_0002.json", "global_0003.json", "local0_0003.json",
                           "local1_0002.json"}) {
    EXPECT_TRUE(fs::exists(seed1 / "checkpoints" / name)) << name;
  }
  EXPECT_FALSE(fs::exists(seed1 / "checkpoints" / "global_0001.json"));
  EXPECT_TRUE(fs::exists(seed1 / "timing.csv"));

  // The final checkpoint reproduces the final evaluation.
  const auto policy = LoadPolicy((seed1 / "checkpoints" / "global_0003.json").string());
  const EvalResult again = EvaluatePolicy(*policy, c);
  EXPECT_EQ(again.mean_cost, runs[0].final_eval->mean_cost);
  EXPECT_EQ(again.success_rate, runs[0].final_eval->success_rate);

  const json report = Compare({root});
  EXPECT_EQ(report["runs"][0]["seeds"], json({1, 2}));
  EXPECT_EQ(report["runs"][0]["final_iteration"], 3);
}

TEST(RunExperimentTest, RerunIsByteIdentical) {
  const std::string a = testing::ScratchDir("harness_det_a");
  const std::string b = testing::ScratchDir("harness_det_b");
  ExperimentConfig ca = Tiny(a);
  ca.seeds = {4};
  ExperimentConfig cb = ca;
  cb.output.dir = b;
  RunExperiment(ca);
  RunExperiment(cb);
  for (const char* file : {"metrics.csv", "eval.csv", "summary.json", "checkpoints/global_0003.json"}) {
    EXPECT_EQ(Slurp(fs::path(SeedDirectory(a, 4)) / file), Slurp(fs::path(SeedDirectory(b, 4)) / file))
        << file;
  }
}

TEST(RunExperimentTest, ZeroIterationsProduceEmptyCurves) {
  const std::string root = testing::ScratchDir("harness_zero");
  ExperimentConfig c = Tiny(root);
  c.gps.local_iterations = 0;
  c.gps.global_iterations = 0;
  c.seeds = {1};
  const std::vector<SeedRun> runs = RunExperiment(c);
  EXPECT_TRUE(runs[0].records.empty());
  EXPECT_FALSE(runs[0].final_eval.has_value());
  EXPECT_EQ(Slurp(fs::path(SeedDirectory(root, 1)) / "metrics.csv"), std::string(kMetricsHeader) + "\n");
  const json summary = LoadJson((fs::path(SeedDirectory(root, 1)) / "summary.json").string());
  EXPECT_TRUE(summary["final_eval"].is_null());
}

TEST(RunExperimentTest, FailureIsRecorded) {
  const std::string root = testing::ScratchDir("harness_fail");
  ExperimentConfig c = Tiny(root);
  c.seeds = {1};
  c.gps.init_learning_rate = 1e300;  // training overflows
  EXPECT_THROW(RunExperiment(c), Error);
  const json summary = LoadJson((fs::path(SeedDirectory(root, 1)) / "summary.json").string());
  EXPECT_EQ(summary["status"], "failed");
  EXPECT_NE(summary["error"].get<std::string>().find("diverged"), std::string::npos);
}

TEST(EvaluatePolicyTest, RejectsMismatchedPolicy) {
  ExperimentConfig c = Tiny("unused");
  const MlpPolicy wrong = MlpPolicy::Create(7, 2, {4}, 15, 1.0, 1);
  EXPECT_THROW(EvaluatePolicy(wrong, c), Error);
  const MlpPolicy short_horizon = MlpPolicy::Create(4, 2, {4}, 10, 1.0, 1);
  EXPECT_THROW(EvaluatePolicy(short_horizon, c), Error);
}

}  // namespace
}  // namespace pigps
