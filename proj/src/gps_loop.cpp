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

#include "gps_loop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "rng.hpp"

namespace pigps {

namespace {

// Stream tags for DeriveSeed.
enum : uint64_t {
  kTagFixedInstances = 1,
  kTagNetwork = 2,
  kTagRollout = 3,
  kTagTrain = 4,
  kTagGlobalInstances = 5,
};

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

double MeanCost(const SampleSet& samples) {
  double total = 0.0;
  for (const Trajectory& tr : samples) {
    for (double c : tr.costs) total += c;
  }
  return total / static_cast<double>(samples.size());
}

double MeanAbsStepCost(const SampleSet& samples) {
  double total = 0.0;
  std::size_t count = 0;
  for (const Trajectory& tr : samples) {
    for (double c : tr.costs) total += std::abs(c);
    count += tr.costs.size();
  }
  return total / static_cast<double>(count);
}

double SuccessRate(const Environment& env, const SampleSet& samples) {
  int hits = 0;
  for (const Trajectory& tr : samples) hits += env.Success(tr) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

TrainOptions MakeTrainOptions(const GpsConfig& config, double learning_rate, int iteration) {
  TrainOptions opts;
  opts.learning_rate = learning_rate;
  opts.epochs = config.epochs;
  opts.batch_size = config.batch_size;
  opts.momentum = config.momentum;
  opts.seed = DeriveSeed(config.seed, {kTagTrain, static_cast<uint64_t>(iteration)});
  return opts;
}

MlpPolicy Distill(const MlpPolicy& global, SupervisedSet data, const TrainOptions& opts) {
  NormalizePrecisions(data);
  return TrainSupervised(global, data, opts).policy;
}

void Emit(GpsState& state, IterationRecord record, const IterationCallback& cb) {
  state.records.push_back(std::move(record));
  if (cb) cb(state, state.records.back());
}

}  // namespace

SampleSet SampleRollouts(const Environment& env, const StochasticPolicy& policy, int n,
                         uint64_t seed, int iteration, int slot) {
  SampleSet samples;
  samples.reserve(n);
  for (int i = 0; i < n; ++i) {
    const uint64_t s = DeriveSeed(seed, {kTagRollout, static_cast<uint64_t>(iteration),
                                         static_cast<uint64_t>(slot), static_cast<uint64_t>(i)});
    samples.push_back(Rollout(env, policy, s));
  }
  return samples;
}

std::string ToString(LocalOptimizer optimizer) {
  return optimizer == LocalOptimizer::kPi2 ? "pi2" : "lqr";
}

std::string ToString(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kPiGps: return "pi-gps";
    case Algorithm::kPiGpsW: return "pi-gps-w";
    case Algorithm::kReps: return "reps";
  }
  return "pi-gps";
}

LocalOptimizer ParseLocalOptimizer(const std::string& name) {
  if (name == "pi2") return LocalOptimizer::kPi2;
  if (name == "lqr") return LocalOptimizer::kLqr;
  throw Error(ErrorCode::kConfig, "unknown optimizer '" + name + "' (expected pi2 or lqr)");
}

Algorithm ParseAlgorithm(const std::string& name) {
  if (name == "pi-gps") return Algorithm::kPiGps;
  if (name == "pi-gps-w") return Algorithm::kPiGpsW;
  if (name == "reps") return Algorithm::kReps;
  throw Error(ErrorCode::kConfig,
              "unknown algorithm '" + name + "' (expected pi-gps, pi-gps-w or reps)");
}

void ValidateGpsConfig(const GpsConfig& c) {
  std::vector<std::string> problems;
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  };
  need(c.instances >= 1, "gps.instances_per_iteration must be >= 1");
  need(c.samples >= 2, "gps.samples_per_instance must be >= 2");
  need(c.local_iterations >= 0, "gps.local_iterations must be >= 0");
  need(c.global_iterations >= 0, "gps.global_iterations must be >= 0");
  need(c.epsilon > 0.0 && std::isfinite(c.epsilon), "gps.epsilon must be > 0");
  need(c.initial_noise_std > 0.0, "gps.initial_noise_std must be > 0");
  need(c.noise_increase > 0.0, "gps.noise_increase must be > 0");
  need(c.kl_penalty_weight >= 0.0, "gps.kl_penalty_weight must be >= 0");
  need(c.covariance_floor > 0.0 && std::isfinite(c.covariance_floor),
       "gps.covariance_floor must be > 0");
  need(c.init_learning_rate > 0.0 && c.global_learning_rate > 0.0,
       "gps.train learning rates must be > 0");
  need(c.epochs >= 0, "gps.train.epochs must be >= 0");
  need(c.batch_size >= 1, "gps.train.batch_size must be >= 1");
  need(c.momentum >= 0.0 && c.momentum < 1.0, "gps.train.momentum must be in [0, 1)");
  need(c.curriculum_start > 0.0 && c.curriculum_start <= 1.0,
       "gps.curriculum.start_fraction must be in (0, 1]");
  need(c.dynamics_prior_strength >= 0.0 && c.dynamics_ridge >= 0.0,
       "gps.dynamics prior strength and ridge must be >= 0");
  need(c.init.duration > 0.0 && c.init.duration <= 1.0, "gps.init.duration must be in (0, 1]");
  for (int h : c.hidden) need(h >= 1, "gps.hidden widths must be >= 1");
  if (c.optimizer == LocalOptimizer::kLqr) {
    need(c.instances == 1 && c.global_iterations == 0,
         "gps.optimizer lqr is only supported for a single instance in the local phase");
  }
  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "invalid configuration:";
    for (const std::string& p : problems) msg << "\n  - " << p;
    throw Error(ErrorCode::kConfig, msg.str());
  }
}

double IterationRecord::MeanCost() const {
  double total = 0.0;
  for (const InstanceRecord& r : instances) total += r.mean_cost;
  return instances.empty() ? 0.0 : total / static_cast<double>(instances.size());
}

double IterationRecord::SuccessRate() const {
  double total = 0.0;
  for (const InstanceRecord& r : instances) total += r.success_rate;
  return instances.empty() ? 0.0 : total / static_cast<double>(instances.size());
}

LinGaussPolicy ScriptedPolicy(const TaskSpec& task, const ScriptedInit& init,
                              const Vector& start, double noise_std) {
  const int horizon = task.horizon();
  const int dx = task.state_dim();
  const double dt = task.kind == TaskKind::kPointMass ? task.point_mass.dt : task.latch.dt;
  Vector goal = task.instances.TargetCenter();
  goal[0] += init.target_offset[0];
  goal[1] += init.target_offset[1];
  const Vector delta = goal - start;
  const double duration = std::max(dt, init.duration * horizon * dt);

  Matrix gain = Matrix::Zero(2, dx);
  gain.block(0, 0, 2, 2) = -init.kp * Matrix::Identity(2, 2);
  gain.block(0, 2, 2, 2) = -init.kd * Matrix::Identity(2, 2);
  std::vector<Matrix> gains(horizon, gain);
  std::vector<Vector> offsets;
  offsets.reserve(horizon);
  for (int t = 0; t < horizon; ++t) {
    const double tau = std::min(1.0, t * dt / duration);
    const double tau2 = tau * tau;
    const double s = tau * tau2 * (10.0 - 15.0 * tau + 6.0 * tau2);
    const double ds = tau < 1.0 ? 30.0 * tau2 * (1.0 - tau) * (1.0 - tau) / duration : 0.0;
    const double dds = tau < 1.0 ? 60.0 * tau * (1.0 - tau) * (1.0 - 2.0 * tau) /
                                       (duration * duration)
                                 : 0.0;
    const Vector p_ref = start + s * delta;
    offsets.push_back(init.kp * p_ref + init.kd * ds * delta + dds * delta);
  }
  std::vector<Matrix> covs(horizon, noise_std * noise_std * Matrix::Identity(2, 2));
  return LinGaussPolicy(std::move(gains), std::move(offsets), std::move(covs));
}

LinGaussPolicy LinearizeGlobal(const MlpPolicy& global, const SampleSet& samples,
                               double ridge) {
  const int horizon = ValidateSamples(samples);
  const auto n = static_cast<Eigen::Index>(samples.size());
  const int dx = global.state_dim();
  const int du = global.action_dim();
  std::vector<Matrix> gains;
  std::vector<Vector> offsets;
  std::vector<Matrix> covs;
  for (int t = 0; t < horizon; ++t) {
    Matrix z(dx + 1, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      z.col(i).head(dx) = samples[static_cast<std::size_t>(i)].states[t];
      z(dx, i) = 1.0;
    }
    const Matrix y = global.ForwardBatch(z.topRows(dx));
    Matrix gram = z * z.transpose();
    gram.diagonal().array() += ridge * (1.0 + gram.trace() / static_cast<double>(dx + 1));
    const Matrix w = gram.ldlt().solve(z * y.transpose()).transpose();  // du x (dx+1)
    gains.push_back(w.leftCols(dx));
    offsets.push_back(w.col(dx));
    covs.push_back(global.Covariance(t));
  }
  (void)du;
  return LinGaussPolicy(std::move(gains), std::move(offsets), std::move(covs));
}

InstanceDistribution CurriculumDistribution(const TaskSpec& task, const GpsConfig& config,
                                            int global_iteration) {
  if (!config.curriculum) return task.instances;
  const double steps = std::max(1, config.global_iterations);
  const double progress = std::min(1.0, (global_iteration + 1) / steps);
  return task.instances.Scaled(config.curriculum_start + (1.0 - config.curriculum_start) * progress);
}

GpsState Initialize(const TaskSpec& task, const GpsConfig& config,
                    const IterationCallback& on_iteration) {
  ValidateGpsConfig(config);
  const auto started = std::chrono::steady_clock::now();
  const InstanceDistribution fixed_dist =
      config.curriculum ? task.instances.Scaled(config.curriculum_start) : task.instances;
  Rng instance_rng(DeriveSeed(config.seed, {kTagFixedInstances}));

  const double variance = config.initial_noise_std * config.initial_noise_std;
  GpsState state{MlpPolicy::Create(task.state_dim(), task.action_dim(), config.hidden,
                                   task.horizon(), variance,
                                   DeriveSeed(config.seed, {kTagNetwork})),
                 {}, {}, {}, {}, 0, 0, 0};
  IterationRecord record;
  record.iteration = 0;
  record.phase = "init";
  std::vector<SampleSet> all_samples;
  SupervisedSet data;
  for (int m = 0; m < config.instances; ++m) {
    Instance instance = SampleInstance(fixed_dist, instance_rng);
    LinGaussPolicy local = ScriptedPolicy(task, config.init, instance.start,
                                          config.initial_noise_std);
    const auto env = task.Make(instance);
    SampleSet samples = SampleRollouts(*env, local, config.samples, config.seed, 0, m);
    SupervisedSet part = BuildDistillationSet(local, samples);
    data.insert(data.end(), part.begin(), part.end());
    record.instances.push_back({m, MeanCost(samples), SuccessRate(*env, samples), 0.0, 0.0, 0.0});
    state.instances.push_back(std::move(instance));
    state.locals.push_back(std::move(local));
    state.dynamics.emplace_back();
    all_samples.push_back(std::move(samples));
  }
  state.next_instance_id = config.instances;
  state.global = Distill(state.global, std::move(data),
                         MakeTrainOptions(config, config.init_learning_rate, 0));
  state.global = UpdateNoise(state.global, state.locals);
  for (int m = 0; m < config.instances; ++m) {
    record.instances[m].kl_to_global = TrajectoryKl(state.locals[m], state.global, all_samples[m]);
  }
  record.wall_clock_seconds = Seconds(started);
  Emit(state, std::move(record), on_iteration);
  return state;
}

void RunLocalPhase(const TaskSpec& task, const GpsConfig& config, GpsState& state,
                   const IterationCallback& on_iteration) {
  ValidateGpsConfig(config);
  const KlBound bound(config.epsilon);
  for (int k = 0; k < config.local_iterations; ++k) {
    const auto started = std::chrono::steady_clock::now();
    const int iteration = ++state.iteration;
    IterationRecord record;
    record.iteration = iteration;
    record.phase = "local";
    std::vector<SampleSet> all_samples;
    SupervisedSet data;
    for (std::size_t m = 0; m < state.instances.size(); ++m) {
      const auto env = task.Make(state.instances[m]);
      SampleSet samples = SampleRollouts(*env, state.locals[m], config.samples, config.seed,
                                         iteration, static_cast<int>(m));
      InstanceRecord rec{static_cast<int>(m), MeanCost(samples), SuccessRate(*env, samples),
                         0.0, 0.0, 0.0};
      if (config.optimizer == LocalOptimizer::kPi2) {
        const KlPenalty penalty{config.kl_penalty_weight * MeanAbsStepCost(samples), &state.global};
        Pi2Result step = Pi2Update(state.locals[m], samples, bound, penalty, config.covariance_floor);
        rec.min_eta = step.weights.eta.minCoeff();
        rec.max_eta = step.weights.eta.maxCoeff();
        state.locals[m] = std::move(step.policy);
      } else {
        DynamicsFitOptions fit{config.dynamics_prior_strength, config.dynamics_ridge};
        const LinearDynamics* prior = state.dynamics[m] ? &*state.dynamics[m] : nullptr;
        LinearDynamics dyn = FitDynamics(samples, fit, prior, env->action_limit());
        const QuadraticCostExpansion cost = ExpandCost(*env, samples);
        LqrOptions lqr;
        lqr.covariance_floor = config.covariance_floor;
        LqrResult step = LqrBackwardKl(dyn, cost, state.locals[m], bound, lqr);
        rec.min_eta = step.eta;
        rec.max_eta = step.eta;
        state.locals[m] = std::move(step.policy);
        state.dynamics[m] = std::move(dyn);
      }
      SupervisedSet part = BuildDistillationSet(state.locals[m], samples);
      data.insert(data.end(), part.begin(), part.end());
      record.instances.push_back(rec);
      all_samples.push_back(std::move(samples));
    }
    state.global = Distill(state.global, std::move(data),
                           MakeTrainOptions(config, config.init_learning_rate, iteration));
    state.global = UpdateNoise(state.global, state.locals);
    for (std::size_t m = 0; m < state.instances.size(); ++m) {
      record.instances[m].kl_to_global = TrajectoryKl(state.locals[m], state.global, all_samples[m]);
    }
    record.wall_clock_seconds = Seconds(started);
    Emit(state, std::move(record), on_iteration);
  }
}

void RunGlobalPhase(const TaskSpec& task, const GpsConfig& config, GpsState& state,
                    const IterationCallback& on_iteration) {
  ValidateGpsConfig(config);
  if (config.global_iterations == 0) return;
  const KlBound bound(config.epsilon);

  if (state.global_iterations_done == 0) {
    const double scale = config.noise_increase * config.noise_increase;
    std::vector<Matrix> noise = state.global.noise_covariances();
    for (Matrix& c : noise) c *= scale;
    state.global = state.global.WithNoise(std::move(noise));
  }

  for (int k = 0; k < config.global_iterations; ++k) {
    const auto started = std::chrono::steady_clock::now();
    const int iteration = ++state.iteration;
    const InstanceDistribution dist =
        CurriculumDistribution(task, config, state.global_iterations_done);
    IterationRecord record;
    record.iteration = iteration;
    record.phase = "global";

    std::vector<SampleSet> all_samples;
    std::vector<LinGaussPolicy> updated;
    std::vector<Matrix> weights;
    for (int m = 0; m < config.instances; ++m) {
      const Instance instance = SampleInstance(
          dist, DeriveSeed(config.seed, {kTagGlobalInstances, static_cast<uint64_t>(iteration),
                                         static_cast<uint64_t>(m)}));
      const auto env = task.Make(instance);
      SampleSet samples = SampleRollouts(*env, state.global, config.samples, config.seed,
                                         iteration, m);
      const LinGaussPolicy linearized = LinearizeGlobal(state.global, samples);
      Pi2Result step = Pi2Update(linearized, samples, bound, std::nullopt, config.covariance_floor);
      record.instances.push_back({state.next_instance_id++, MeanCost(samples),
                                  SuccessRate(*env, samples), step.weights.eta.minCoeff(),
                                  step.weights.eta.maxCoeff(), 0.0});
      updated.push_back(std::move(step.policy));
      weights.push_back(std::move(step.weights.probabilities));
      all_samples.push_back(std::move(samples));
    }

    const TrainOptions opts = MakeTrainOptions(config, config.global_learning_rate, iteration);
    switch (config.algorithm) {
      case Algorithm::kPiGps: {
        SupervisedSet data;
        for (int m = 0; m < config.instances; ++m) {
          SupervisedSet part = BuildDistillationSet(updated[m], all_samples[m]);
          data.insert(data.end(), part.begin(), part.end());
        }
        state.global = Distill(state.global, std::move(data), opts);
        break;
      }
      case Algorithm::kPiGpsW:
        state.global = PiGpsWTrain(state.global, updated, all_samples, weights, opts).policy;
        break;
      case Algorithm::kReps: {
        SupervisedSet data;
        for (int m = 0; m < config.instances; ++m) {
          SupervisedSet part = BuildRepsSet(all_samples[m], weights[m]);
          data.insert(data.end(), part.begin(), part.end());
        }
        state.global = TrainSupervised(state.global, data, opts).policy;
        break;
      }
    }
    state.global = UpdateNoise(state.global, updated);
    for (int m = 0; m < config.instances; ++m) {
      record.instances[m].kl_to_global = TrajectoryKl(updated[m], state.global, all_samples[m]);
    }
    ++state.global_iterations_done;
    record.wall_clock_seconds = Seconds(started);
    Emit(state, std::move(record), on_iteration);
  }
}

EvalResult Evaluate(const StochasticPolicy& policy, const TaskSpec& task,
                    const InstanceDistribution& distribution, int n_eval, uint64_t seed,
                    bool keep_trajectories) {
  if (n_eval < 1) ThrowInvalid("Evaluate: n_eval must be >= 1");
  EvalResult result;
  int hits = 0;
  double cost = 0.0;
  Rng dummy(0);
  for (int e = 0; e < n_eval; ++e) {
    const Instance instance =
        SampleInstance(distribution, DeriveSeed(seed, {static_cast<uint64_t>(e)}));
    const auto env = task.Make(instance);
    Trajectory tr = Rollout(*env, policy, dummy, /*noiseless=*/true);
    hits += env->Success(tr) ? 1 : 0;
    for (double c : tr.costs) cost += c;
    if (keep_trajectories) result.trajectories.push_back(std::move(tr));
  }
  result.success_rate = static_cast<double>(hits) / n_eval;
  result.mean_cost = cost / n_eval;
  return result;
}

GpsState RunGps(const TaskSpec& task, const GpsConfig& config, const EvalProtocol& eval,
                const IterationCallback& on_iteration) {
  const int last = config.local_iterations + config.global_iterations;
  auto with_eval = [&](const GpsState& state, const IterationRecord& record) {
    const bool due = record.iteration == last ||
                     (eval.every > 0 && record.iteration % eval.every == 0);
    if (due) {
      const StochasticPolicy& policy =
          eval.local ? static_cast<const StochasticPolicy&>(state.locals.at(0)) : state.global;
      auto& mutable_record = const_cast<IterationRecord&>(record);
      mutable_record.eval = Evaluate(policy, task, task.instances, eval.n_eval, eval.seed);
    }
    if (on_iteration) on_iteration(state, record);
  };
  GpsState state = Initialize(task, config, with_eval);
  RunLocalPhase(task, config, state, with_eval);
  RunGlobalPhase(task, config, state, with_eval);
  return state;
}

}  // namespace pigps
