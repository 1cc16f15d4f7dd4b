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


#include "config.hpp"

#include <filesystem>
#include <string>

#include <gtest/gtest.h>

namespace pigps {
namespace {

using nlohmann::json;

json Minimal() {
  return json::parse(R"({
    "schema": "pigps.experiment/1",
    "name": "tiny",
    "task": {"kind": "point_mass", "point_mass": {"horizon": 10}},
    "gps": {"local_iterations": 1, "global_iterations": 1, "samples_per_instance": 4},
    "evaluation": {"n_eval": 2},
    "output": {"dir": "out"},
    "seeds": [3, 4]
  })");
}

TEST(ConfigTest, MinimalDocumentTakesDefaults) {
  const ExperimentConfig c = ParseExperiment(Minimal());
  EXPECT_EQ(c.name, "tiny");
  EXPECT_EQ(c.task.kind, TaskKind::kPointMass);
  EXPECT_EQ(c.task.point_mass.horizon, 10);
  EXPECT_EQ(c.task.point_mass.dt, PointMassParams{}.dt);
  EXPECT_EQ(c.task.instances, DefaultInstances(TaskKind::kPointMass));
  EXPECT_EQ(c.gps.samples, 4);
  EXPECT_EQ(c.gps.epsilon, GpsConfig{}.epsilon);
  EXPECT_EQ(c.evaluation.n_eval, 2);
  EXPECT_EQ(c.seeds, (std::vector<uint64_t>{3, 4}));
  EXPECT_EQ(c.gps.seed, 3u);
}

TEST(ConfigTest, DefaultInstanceBoxes) {
  const InstanceDistribution pm = DefaultInstances(TaskKind::kPointMass);
  EXPECT_EQ(pm.target_low, (Vector(2) << -2.0, -2.0).finished());
  EXPECT_EQ(pm.target_high, (Vector(2) << 2.0, 2.0).finished());
  EXPECT_TRUE(pm.start_low.isZero(0.0));
  EXPECT_TRUE(pm.start_high.isZero(0.0));
}

TEST(ConfigTest, RoundTripsThroughJson) {
  ExperimentConfig c = ParseExperiment(Minimal());
  c.gps.algorithm = Algorithm::kReps;
  c.gps.curriculum = true;
  c.gps.hidden = {7, 3};
  c.gps.init.target_offset = {0.1, -0.2};
  c.task.kind = TaskKind::kLatch;
  c.task.instances = DefaultInstances(TaskKind::kLatch);
  c.evaluation.local = true;
  const ExperimentConfig back = ParseExperimentText(SerializeExperiment(c));
  EXPECT_EQ(back, c);
}

TEST(ConfigTest, ShippedConfigsParse) {
  const std::filesystem::path dir(PIGPS_CONFIG_DIR);
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(LoadExperiment(entry.path().string())) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 4);
}

TEST(ConfigTest, ListsEveryViolation) {
  json doc = Minimal();
  doc["gps"]["samples_per_instance"] = 1;
  doc["gps"]["epsilon"] = 0.0;
  doc["gps"]["bogus"] = 1;
  doc["task"]["point_mass"]["dt"] = "fast";
  doc["evaluation"]["n_eval"] = 0;
  doc["seeds"] = json::array({1, 1});
  try {
    ParseExperiment(doc);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
    const std::string msg = e.what();
    for (const char* key : {"samples_per_instance", "epsilon", "gps.bogus", "point_mass.dt",
                            "n_eval", "seeds"}) {
      EXPECT_NE(msg.find(key), std::string::npos) << key << " missing from:\n" << msg;
    }
  }
}

TEST(ConfigTest, RejectsSchemaAndMissingSections) {
  json doc = Minimal();
  doc["schema"] = "pigps.experiment/0";
  EXPECT_THROW(ParseExperiment(doc), Error);
  doc = Minimal();
  doc.erase("evaluation");
  EXPECT_THROW(ParseExperiment(doc), Error);
  doc = Minimal();
  doc["task"]["instances"] = {{"target_low", {1.0, 1.0}}, {"target_high", {0.0, 0.0}}};
  EXPECT_THROW(ParseExperiment(doc), Error);
  EXPECT_THROW(ParseExperimentText("{not json"), Error);
  EXPECT_THROW(LoadExperiment("/nonexistent/config.json"), Error);
}

TEST(ConfigTest, OverridesEditNestedKeys) {
  json doc = Minimal();
  ApplyOverride(doc, "gps.epsilon=0.25");
  ApplyOverride(doc, "gps.algorithm=pi-gps-w");
  ApplyOverride(doc, "gps.hidden=[5,5]");
  ApplyOverride(doc, "gps.train.epochs=3");
  ApplyOverride(doc, "seeds=[9]");
  const ExperimentConfig c = ParseExperiment(doc);
  EXPECT_EQ(c.gps.epsilon, 0.25);
  EXPECT_EQ(c.gps.algorithm, Algorithm::kPiGpsW);
  EXPECT_EQ(c.gps.hidden, (std::vector<int>{5, 5}));
  EXPECT_EQ(c.gps.epochs, 3);
  EXPECT_EQ(c.seeds, (std::vector<uint64_t>{9}));
  EXPECT_THROW(ApplyOverride(doc, "no_equals_sign"), Error);
  EXPECT_THROW(ApplyOverride(doc, "=1"), Error);
}

}  // namespace
}  // namespace pigps
