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

// Mirror-descent guided policy search with PI2 local steps.
//
// A run is: scripted initialization (iteration 0), then `local_iterations`
// of local-policy sampling on a fixed instance set, then
// `global_iterations` of global-policy sampling on fresh random instances.
// Every iteration ends with supervised distillation into the global policy.

#ifndef PIGPS_GPS_LOOP_HPP_
#define PIGPS_GPS_LOOP_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "controllers.hpp"
#include "envs.hpp"
#include "global_policy.hpp"
#include "lqr_baseline.hpp"
#include "pi2.hpp"

namespace pigps {

enum class LocalOptimizer { kPi2, kLqr };
enum class Algorithm { kPiGps, kPiGpsW, kReps };

std::string ToString(LocalOptimizer optimizer);
std::string ToString(Algorithm algorithm);
LocalOptimizer ParseLocalOptimizer(const std::string& name);
Algorithm ParseAlgorithm(const std::string& name);

// Stand-in for demonstrations: a minimum-jerk reference from the start
// position toward the nominal target, tracked by fixed PD gains.
struct ScriptedInit {
  double kp = 10.0;
  double kd = 6.324555320336759;  // 2 sqrt(10)
  // Fraction of the horizon the reference motion takes.
  double duration = 0.6;
  // The reference ends at the nominal target plus this offset, as if the
  // demonstration had been recorded for a displaced instance. On the latch
  // the default carries the path past the handle and slightly to its side.
  std::array<double, 2> target_offset{0.35, 0.2};

  bool operator==(const ScriptedInit&) const = default;
};

struct GpsConfig {
  int local_iterations = 2;
  int global_iterations = 5;
  int instances = 5;  // M, per iteration
  int samples = 10;   // N, per instance
  double epsilon = 1.0;
  LocalOptimizer optimizer = LocalOptimizer::kPi2;
  Algorithm algorithm = Algorithm::kPiGps;
  double initial_noise_std = 1.0;
  // Exploration std multiplier applied when global sampling starts.
  double noise_increase = 1.5;
  // KL penalty weight against the global policy during local sampling, as a
  // multiple of the mean per-step cost magnitude.
  double kl_penalty_weight = 0.1;
  // Smallest eigenvalue of any updated local covariance.
  double covariance_floor = kCovarianceFloor;
  std::vector<int> hidden{40, 40};
  double init_learning_rate = 5e-3;
  double global_learning_rate = 1e-3;
  int epochs = 20;
  int batch_size = 64;
  double momentum = 0.9;
  // Linear widening of the target box from `curriculum_start` of its width
  // (used for the fixed instances too) to the full box at the last global
  // iteration.
  bool curriculum = false;
  double curriculum_start = 0.2;
  double dynamics_prior_strength = 1.0;
  double dynamics_ridge = 1e-6;
  ScriptedInit init;
  uint64_t seed = 1;

  bool operator==(const GpsConfig&) const = default;
};

// Throws Error(kConfig) listing every violated constraint.
void ValidateGpsConfig(const GpsConfig& config);

struct InstanceRecord {
  int instance_id = 0;
  double mean_cost = 0.0;
  double success_rate = 0.0;
  double min_eta = 0.0;
  double max_eta = 0.0;
  double kl_to_global = 0.0;
};

struct EvalResult {
  double success_rate = 0.0;
  double mean_cost = 0.0;
  std::vector<Trajectory> trajectories;  // filled when requested
};

struct IterationRecord {
  int iteration = 0;
  std::string phase;  // "init", "local" or "global"
  std::vector<InstanceRecord> instances;
  double wall_clock_seconds = 0.0;
  std::optional<EvalResult> eval;

  double MeanCost() const;
  double SuccessRate() const;
};

struct GpsState {
  MlpPolicy global;
  std::vector<Instance> instances;      // fixed local-sampling instances
  std::vector<LinGaussPolicy> locals;   // one per fixed instance
  std::vector<std::optional<LinearDynamics>> dynamics;  // LQR priors
  std::vector<IterationRecord> records;
  int iteration = 0;
  int global_iterations_done = 0;
  int next_instance_id = 0;
};

struct EvalProtocol {
  int n_eval = 30;
  uint64_t seed = 12345;
  int every = 0;  // evaluate after every k-th iteration; 0 = final only
  bool local = false;  // evaluate the first local controller, not the global policy

  bool operator==(const EvalProtocol&) const = default;
};

using IterationCallback = std::function<void(const GpsState&, const IterationRecord&)>;

// N noisy rollouts of `policy`; rollout i of (iteration, slot) uses its own
// derived seed, so any sample set can be regenerated.
SampleSet SampleRollouts(const Environment& env, const StochasticPolicy& policy, int n,
                         uint64_t seed, int iteration, int slot);

LinGaussPolicy ScriptedPolicy(const TaskSpec& task, const ScriptedInit& init,
                              const Vector& start, double noise_std);

// Least-squares linear-Gaussian fit of the global mean around the sampled
// states at each timestep, with the global noise covariance attached.
LinGaussPolicy LinearizeGlobal(const MlpPolicy& global, const SampleSet& samples,
                               double ridge = 1e-6);

// Draws the fixed instances, builds scripted local controllers, samples
// them and distills the result into a fresh network (iteration 0).
GpsState Initialize(const TaskSpec& task, const GpsConfig& config,
                    const IterationCallback& on_iteration = {});

void RunLocalPhase(const TaskSpec& task, const GpsConfig& config, GpsState& state,
                   const IterationCallback& on_iteration = {});

void RunGlobalPhase(const TaskSpec& task, const GpsConfig& config, GpsState& state,
                    const IterationCallback& on_iteration = {});

// Noiseless rollouts on n_eval instances drawn from `distribution`.
EvalResult Evaluate(const StochasticPolicy& policy, const TaskSpec& task,
                    const InstanceDistribution& distribution, int n_eval, uint64_t seed,
                    bool keep_trajectories = false);

// Initialize + both phases, with optional periodic evaluation.
GpsState RunGps(const TaskSpec& task, const GpsConfig& config, const EvalProtocol& eval,
                const IterationCallback& on_iteration = {});

// Builds the instance box used at a global iteration (0-based).
InstanceDistribution CurriculumDistribution(const TaskSpec& task, const GpsConfig& config,
                                            int global_iteration);

}  // namespace pigps

#endif  // PIGPS_GPS_LOOP_HPP_
