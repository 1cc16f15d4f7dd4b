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


// Command-line front end over the C API.
//
//   pigps run <config> [--seed S] [--out DIR] [--override key=value ...]
//   pigps eval <checkpoint> <config> [--seed S] [--out FILE] [--override ...]
//   pigps compare <dirs...> [--out FILE]
//
// The exit status is the pigps_status of the first failing call.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pigps/pigps.h"

namespace {

struct Options {
  std::string config;
  std::string checkpoint;
  std::vector<std::string> dirs;
  std::optional<uint64_t> seed;
  std::string out;
  std::vector<std::string> overrides;
};

int Report(pigps_status status) {
  if (status != PIGPS_OK) std::cerr << "error: " << pigps_last_error() << "\n";
  return static_cast<int>(status);
}

bool Emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return true;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) {
    std::cerr << "error: cannot write '" << path << "'\n";
    return false;
  }
  return true;
}

// Loads the config and applies the overrides in order.
pigps_status OpenExperiment(const Options& opts, pigps_experiment** experiment) {
  pigps_status status = pigps_experiment_load(opts.config.c_str(), experiment);
  for (const std::string& o : opts.overrides) {
    if (status != PIGPS_OK) break;
    status = pigps_experiment_override(*experiment, o.c_str());
  }
  return status;
}

int Run(const Options& opts) {
  pigps_experiment* experiment = nullptr;
  pigps_status status = OpenExperiment(opts, &experiment);
  if (status == PIGPS_OK && opts.seed) status = pigps_experiment_set_seed(experiment, *opts.seed);
  if (status == PIGPS_OK && !opts.out.empty()) {
    status = pigps_experiment_set_output(experiment, opts.out.c_str());
  }
  if (status == PIGPS_OK) status = pigps_experiment_run(experiment);
  pigps_experiment_free(experiment);
  return Report(status);
}

int Eval(const Options& opts) {
  pigps_experiment* experiment = nullptr;
  pigps_policy* policy = nullptr;
  pigps_status status = OpenExperiment(opts, &experiment);
  if (status == PIGPS_OK && opts.seed) {
    const std::string o = "evaluation.seed=" + std::to_string(*opts.seed);
    status = pigps_experiment_override(experiment, o.c_str());
  }
  if (status == PIGPS_OK) status = pigps_policy_load(opts.checkpoint.c_str(), &policy);
  double success = 0.0, cost = 0.0;
  if (status == PIGPS_OK) status = pigps_policy_evaluate(policy, experiment, &success, &cost);
  pigps_policy_free(policy);
  pigps_experiment_free(experiment);
  if (status != PIGPS_OK) return Report(status);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "{\"success_rate\": %.17g, \"mean_cost\": %.17g}\n", success, cost);
  return Emit(buf, opts.out) ? 0 : static_cast<int>(PIGPS_IO);
}

int Compare(const Options& opts) {
  std::vector<const char*> dirs;
  for (const std::string& d : opts.dirs) dirs.push_back(d.c_str());
  char* report = nullptr;
  const pigps_status status = pigps_compare(dirs.data(), dirs.size(), &report);
  if (status != PIGPS_OK) return Report(status);
  const bool ok = Emit(report, opts.out);
  pigps_string_free(report);
  return ok ? 0 : static_cast<int>(PIGPS_IO);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Path integral guided policy search"};
  app.require_subcommand(1);
  Options opts;
  uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd, const char* out_help) {
    cmd->add_option("--out", opts.out, out_help);
  };
  auto add_config_flags = [&](CLI::App* cmd) {
    cmd->add_option("--override", opts.overrides, "Config override key=value (repeatable)");
    cmd->add_option("--seed", seed, "Seed");
  };

  CLI::App* run = app.add_subcommand("run", "Run an experiment");
  run->add_option("config", opts.config, "Experiment config")->required()->check(CLI::ExistingFile);
  add_config_flags(run);
  add_common(run, "Output directory");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a policy checkpoint");
  eval->add_option("checkpoint", opts.checkpoint, "Policy checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("config", opts.config, "Experiment config")->required()->check(CLI::ExistingFile);
  add_config_flags(eval);
  add_common(eval, "Write the result here instead of stdout");

  CLI::App* compare = app.add_subcommand("compare", "Compare finished runs");
  compare->add_option("dirs", opts.dirs, "Run directories")->required()->check(CLI::ExistingDirectory);
  add_common(compare, "Write the report here instead of stdout");

  CLI11_PARSE(app, argc, argv);
  if (run->count("--seed") || eval->count("--seed")) opts.seed = seed;

  if (*run) return Run(opts);
  if (*eval) return Eval(opts);
  return Compare(opts);
}
