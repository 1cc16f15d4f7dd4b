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


// Policy checkpoints as versioned JSON documents.
//
//   {"schema": "pigps.mlp/1", "layers": [...], "noise": [...]}
//   {"schema": "pigps.lingauss/1", "gains": [...], "offsets": [...], "covariances": [...]}
//
// Matrices are arrays of rows. Numbers are written with shortest round-trip
// formatting, so save then load reproduces every double exactly.

#ifndef PIGPS_CHECKPOINT_HPP_
#define PIGPS_CHECKPOINT_HPP_

#include <memory>
#include <string>

#include <json.hpp>

#include "controllers.hpp"
#include "global_policy.hpp"

namespace pigps {

inline constexpr const char* kMlpSchema = "pigps.mlp/1";
inline constexpr const char* kLinGaussSchema = "pigps.lingauss/1";

nlohmann::json MatrixToJson(const Matrix& m);
Matrix MatrixFromJson(const nlohmann::json& j, const std::string& what);
nlohmann::json VectorToJson(const Vector& v);
Vector VectorFromJson(const nlohmann::json& j, const std::string& what);

nlohmann::json ToJson(const MlpPolicy& policy);
nlohmann::json ToJson(const LinGaussPolicy& policy);
MlpPolicy MlpFromJson(const nlohmann::json& j);
LinGaussPolicy LinGaussFromJson(const nlohmann::json& j);

// Dispatches on the schema id.
std::unique_ptr<StochasticPolicy> PolicyFromJson(const nlohmann::json& j);

void SaveJson(const nlohmann::json& j, const std::string& path);
nlohmann::json LoadJson(const std::string& path);
std::unique_ptr<StochasticPolicy> LoadPolicy(const std::string& path);

}  // namespace pigps

#endif  // PIGPS_CHECKPOINT_HPP_
