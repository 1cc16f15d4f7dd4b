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


#include "checkpoint.hpp"

#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "global_policy.hpp"
#include "test_support.hpp"

namespace pigps {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

TEST(CheckpointTest, MlpRoundTripIsExact) {
  MlpPolicy p = MlpPolicy::Create(4, 2, {7, 3}, 5, 0.3, 11);
  std::mt19937_64 gen(1);
  p = p.WithParameters(testing::RandomVector(gen, static_cast<int>(p.ParameterCount())));
  const fs::path dir = testing::ScratchDir("ckpt_mlp");
  SaveJson(ToJson(p), (dir / "p.json").string());
  const auto back = LoadPolicy((dir / "p.json").string());
  const auto* mlp = dynamic_cast<const MlpPolicy*>(back.get());
  ASSERT_NE(mlp, nullptr);
  EXPECT_EQ(mlp->Parameters(), p.Parameters());
  EXPECT_EQ(mlp->noise_covariances(), p.noise_covariances());
  EXPECT_EQ(LoadJson((dir / "p.json").string())["schema"], "pigps.mlp/1");
}

TEST(CheckpointTest, LinGaussRoundTripIsExact) {
  std::mt19937_64 gen(2);
  const LinGaussPolicy p = testing::RandomLinGauss(gen, 4, 3, 2);
  const LinGaussPolicy back = LinGaussFromJson(json::parse(ToJson(p).dump()));
  EXPECT_EQ(back.gains(), p.gains());
  EXPECT_EQ(back.offsets(), p.offsets());
  EXPECT_EQ(back.covariances(), p.covariances());
}

TEST(CheckpointTest, RowMajorMatrices) {
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(MatrixToJson(m), json::parse("[[1,2,3],[4,5,6]]"));
  EXPECT_EQ(MatrixFromJson(MatrixToJson(m), "m"), m);
  EXPECT_THROW(MatrixFromJson(json::parse("[[1,2],[3]]"), "m"), Error);
}

TEST(CheckpointTest, RejectsBadDocuments) {
  EXPECT_THROW(PolicyFromJson(json{{"schema", "other/1"}}), Error);
  std::mt19937_64 gen(3);
  json doc = ToJson(testing::RandomLinGauss(gen, 2, 2, 1));
  doc["covariances"][0] = json::parse("[[-1.0]]");
  EXPECT_THROW(PolicyFromJson(doc), Error);
  const fs::path dir = testing::ScratchDir("ckpt_bad");
  std::ofstream(dir / "bad.json") << "{oops";
  EXPECT_THROW(LoadJson((dir / "bad.json").string()), Error);
}

}  // namespace
}  // namespace pigps
