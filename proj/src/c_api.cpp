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


#include "pigps/pigps.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include <json.hpp>

#include "checkpoint.hpp"
#include "config.hpp"
#include "harness.hpp"
#include "report.hpp"

struct pigps_experiment {
  nlohmann::json document;
  pigps::ExperimentConfig config;
};

struct pigps_policy {
  std::unique_ptr<pigps::StochasticPolicy> policy;
};

namespace {

thread_local std::string g_last_error;

pigps_status Fail(pigps_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
pigps_status Guard(F body) {
  try {
    body();
    g_last_error.clear();
    return PIGPS_OK;
  } catch (const pigps::Error& e) {
    switch (e.code()) {
      case pigps::ErrorCode::kInvalidArgument: return Fail(PIGPS_INVALID_ARGUMENT, e.what());
      case pigps::ErrorCode::kConfig: return Fail(PIGPS_CONFIG, e.what());
      case pigps::ErrorCode::kIo: return Fail(PIGPS_IO, e.what());
      case pigps::ErrorCode::kNumeric: return Fail(PIGPS_NUMERIC, e.what());
    }
    return Fail(PIGPS_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return Fail(PIGPS_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(PIGPS_INTERNAL, e.what());
  } catch (...) {
    return Fail(PIGPS_INTERNAL, "unknown error");
  }
}

void Require(bool ok, const char* what) {
  if (!ok) pigps::ThrowInvalid(what);
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

pigps_status NewExperiment(nlohmann::json doc, pigps_experiment** out) {
  return Guard([&] {
    Require(out != nullptr, "output handle pointer is null");
    *out = nullptr;
    auto experiment = std::make_unique<pigps_experiment>();
    experiment->config = pigps::ParseExperiment(doc);
    experiment->document = std::move(doc);
    *out = experiment.release();
  });
}

// Applies `edit` to a copy of the document and keeps it only if the result
// still validates.
template <typename F>
pigps_status Edit(pigps_experiment* experiment, F edit) {
  return Guard([&] {
    Require(experiment != nullptr, "experiment handle is null");
    nlohmann::json doc = experiment->document;
    edit(doc);
    pigps::ExperimentConfig config = pigps::ParseExperiment(doc);
    experiment->document = std::move(doc);
    experiment->config = std::move(config);
  });
}

}  // namespace

extern "C" {

const char* pigps_version(void) { return "1.0.0"; }

const char* pigps_last_error(void) { return g_last_error.c_str(); }

void pigps_string_free(char* text) { std::free(text); }

pigps_status pigps_experiment_load(const char* path, pigps_experiment** out) {
  nlohmann::json doc;
  const pigps_status status = Guard([&] {
    Require(path != nullptr, "path is null");
    doc = pigps::LoadJson(path);
  });
  if (status != PIGPS_OK) return status;
  return NewExperiment(std::move(doc), out);
}

pigps_status pigps_experiment_from_string(const char* text, pigps_experiment** out) {
  nlohmann::json doc;
  const pigps_status status = Guard([&] {
    Require(text != nullptr, "config text is null");
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw pigps::Error(pigps::ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
    }
  });
  if (status != PIGPS_OK) return status;
  return NewExperiment(std::move(doc), out);
}

pigps_status pigps_experiment_override(pigps_experiment* experiment, const char* assignment) {
  return Edit(experiment, [&](nlohmann::json& doc) {
    Require(assignment != nullptr, "override is null");
    pigps::ApplyOverride(doc, assignment);
  });
}

pigps_status pigps_experiment_set_seed(pigps_experiment* experiment, uint64_t seed) {
  return Edit(experiment, [&](nlohmann::json& doc) { doc["seeds"] = {seed}; });
}

pigps_status pigps_experiment_set_output(pigps_experiment* experiment, const char* dir) {
  return Edit(experiment, [&](nlohmann::json& doc) {
    Require(dir != nullptr, "output directory is null");
    if (!doc.contains("output") || !doc["output"].is_object()) doc["output"] = nlohmann::json::object();
    doc["output"]["dir"] = dir;
  });
}

pigps_status pigps_experiment_to_string(const pigps_experiment* experiment, char** out) {
  return Guard([&] {
    Require(experiment != nullptr && out != nullptr, "null argument");
    *out = CopyString(pigps::SerializeExperiment(experiment->config));
  });
}

pigps_status pigps_experiment_run(const pigps_experiment* experiment) {
  return Guard([&] {
    Require(experiment != nullptr, "experiment handle is null");
    pigps::RunExperiment(experiment->config);
  });
}

void pigps_experiment_free(pigps_experiment* experiment) { delete experiment; }

pigps_status pigps_policy_load(const char* path, pigps_policy** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto handle = std::make_unique<pigps_policy>();
    handle->policy = pigps::LoadPolicy(path);
    *out = handle.release();
  });
}

pigps_status pigps_policy_dims(const pigps_policy* policy, int* state_dim, int* action_dim,
                               int* horizon) {
  return Guard([&] {
    Require(policy != nullptr, "policy handle is null");
    if (state_dim) *state_dim = policy->policy->state_dim();
    if (action_dim) *action_dim = policy->policy->action_dim();
    if (horizon) *horizon = policy->policy->horizon();
  });
}

pigps_status pigps_policy_mean_action(const pigps_policy* policy, int t, const double* state,
                                      size_t state_len, double* action, size_t action_len) {
  return Guard([&] {
    Require(policy != nullptr && state != nullptr && action != nullptr, "null argument");
    const pigps::StochasticPolicy& p = *policy->policy;
    Require(t >= 0 && t < p.horizon(), "timestep out of range");
    pigps::CheckDim(static_cast<Eigen::Index>(state_len), p.state_dim(), "state");
    pigps::CheckDim(static_cast<Eigen::Index>(action_len), p.action_dim(), "action");
    const pigps::Vector x = Eigen::Map<const pigps::Vector>(state, p.state_dim());
    const pigps::Vector u = p.Mean(t, x);
    std::memcpy(action, u.data(), sizeof(double) * action_len);
  });
}

pigps_status pigps_policy_evaluate(const pigps_policy* policy, const pigps_experiment* experiment,
                                   double* success_rate, double* mean_cost) {
  return Guard([&] {
    Require(policy != nullptr && experiment != nullptr, "null argument");
    const pigps::EvalResult r = pigps::EvaluatePolicy(*policy->policy, experiment->config);
    if (success_rate) *success_rate = r.success_rate;
    if (mean_cost) *mean_cost = r.mean_cost;
  });
}

void pigps_policy_free(pigps_policy* policy) { delete policy; }

pigps_status pigps_compare(const char* const* dirs, size_t count, char** report) {
  return Guard([&] {
    Require(report != nullptr, "report pointer is null");
    Require(dirs != nullptr || count == 0, "dirs is null");
    std::vector<std::string> list;
    for (size_t i = 0; i < count; ++i) {
      Require(dirs[i] != nullptr, "null directory entry");
      list.emplace_back(dirs[i]);
    }
    *report = CopyString(pigps::Compare(list).dump(2) + "\n");
  });
}

}  // extern "C"
