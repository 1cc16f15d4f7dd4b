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

#include <fstream>
#include <sstream>

namespace pigps {

using nlohmann::json;

namespace {

[[noreturn]] void Bad(const std::string& what) {
  throw Error(ErrorCode::kConfig, "checkpoint: " + what);
}

void ExpectSchema(const json& j, const char* schema) {
  if (!j.is_object() || !j.contains("schema") || !j["schema"].is_string()) {
    Bad("missing schema id");
  }
  if (j["schema"].get<std::string>() != schema) {
    Bad("schema '" + j["schema"].get<std::string>() + "' where '" + schema + "' was expected");
  }
}

const json& Field(const json& j, const char* key) {
  if (!j.contains(key)) Bad(std::string("missing field '") + key + "'");
  return j[key];
}

template <typename T, typename F>
std::vector<T> ListFromJson(const json& j, const std::string& what, F convert) {
  if (!j.is_array()) Bad(what + " must be an array");
  std::vector<T> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(convert(j[i], what + "[" + std::to_string(i) + "]"));
  }
  return out;
}

}  // namespace

json MatrixToJson(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix MatrixFromJson(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) Bad(what + " must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      Bad(what + " has ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) Bad(what + " holds a non-number");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

json VectorToJson(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector VectorFromJson(const json& j, const std::string& what) {
  if (!j.is_array()) Bad(what + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) Bad(what + " holds a non-number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json ToJson(const MlpPolicy& policy) {
  json layers = json::array();
  for (const DenseLayer& layer : policy.layers()) {
    layers.push_back({{"weights", MatrixToJson(layer.weights)}, {"bias", VectorToJson(layer.bias)}});
  }
  json noise = json::array();
  for (const Matrix& c : policy.noise_covariances()) noise.push_back(MatrixToJson(c));
  return {{"schema", kMlpSchema}, {"layers", layers}, {"noise", noise}};
}

json ToJson(const LinGaussPolicy& policy) {
  json gains = json::array(), offsets = json::array(), covs = json::array();
  for (int t = 0; t < policy.horizon(); ++t) {
    gains.push_back(MatrixToJson(policy.gains()[t]));
    offsets.push_back(VectorToJson(policy.offsets()[t]));
    covs.push_back(MatrixToJson(policy.covariances()[t]));
  }
  return {{"schema", kLinGaussSchema}, {"gains", gains}, {"offsets", offsets}, {"covariances", covs}};
}

MlpPolicy MlpFromJson(const json& j) {
  ExpectSchema(j, kMlpSchema);
  auto layers = ListFromJson<DenseLayer>(Field(j, "layers"), "layers",
                                         [](const json& l, const std::string& what) {
                                           return DenseLayer{
                                               MatrixFromJson(Field(l, "weights"), what + ".weights"),
                                               VectorFromJson(Field(l, "bias"), what + ".bias")};
                                         });
  auto noise = ListFromJson<Matrix>(Field(j, "noise"), "noise", MatrixFromJson);
  return MlpPolicy(std::move(layers), std::move(noise));
}

LinGaussPolicy LinGaussFromJson(const json& j) {
  ExpectSchema(j, kLinGaussSchema);
  return LinGaussPolicy(ListFromJson<Matrix>(Field(j, "gains"), "gains", MatrixFromJson),
                        ListFromJson<Vector>(Field(j, "offsets"), "offsets", VectorFromJson),
                        ListFromJson<Matrix>(Field(j, "covariances"), "covariances", MatrixFromJson));
}

std::unique_ptr<StochasticPolicy> PolicyFromJson(const json& j) {
  if (!j.is_object() || !j.contains("schema") || !j["schema"].is_string()) Bad("missing schema id");
  const std::string schema = j["schema"];
  if (schema == kMlpSchema) return std::make_unique<MlpPolicy>(MlpFromJson(j));
  if (schema == kLinGaussSchema) return std::make_unique<LinGaussPolicy>(LinGaussFromJson(j));
  Bad("unknown schema '" + schema + "'");
}

void SaveJson(const json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out << j.dump(1) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

json LoadJson(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig, "'" + path + "': " + e.what());
  }
}

std::unique_ptr<StochasticPolicy> LoadPolicy(const std::string& path) {
  return PolicyFromJson(LoadJson(path));
}

}  // namespace pigps
