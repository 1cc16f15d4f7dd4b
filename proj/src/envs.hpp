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

// Simulated tasks: a planar point mass with second-order dynamics, and a
// latch task whose cost only changes once the agent has engaged and pushed
// the latch far enough. Both use a double integrator for the agent.

#ifndef PIGPS_ENVS_HPP_
#define PIGPS_ENVS_HPP_

#include <cstdint>
#include <memory>
#include <string>

#include "common.hpp"
#include "controllers.hpp"
#include "rng.hpp"

namespace pigps {

// One task condition. `target` is the goal (point mass) or the latch
// position (latch); `start` is the initial agent position.
struct Instance {
  Vector target;
  Vector start;

  bool operator==(const Instance&) const = default;
};

// Axis-aligned box over targets and start positions.
struct InstanceDistribution {
  Vector target_low, target_high;
  Vector start_low, start_high;

  bool operator==(const InstanceDistribution&) const = default;

  // Shrinks the target box about its center to `fraction` of its width.
  InstanceDistribution Scaled(double fraction) const;
  Vector TargetCenter() const { return 0.5 * (target_low + target_high); }
  Vector StartCenter() const { return 0.5 * (start_low + start_high); }
};

// Uniform draw within the bounds; throws on empty or inverted bounds.
Instance SampleInstance(const InstanceDistribution& dist, uint64_t seed);
Instance SampleInstance(const InstanceDistribution& dist, Rng& rng);
void ValidateDistribution(const InstanceDistribution& dist);

class Environment {
 public:
  virtual ~Environment() = default;

  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual int horizon() const = 0;

  virtual Vector InitialState() const = 0;
  // u is clamped to the action box before it is applied.
  virtual Vector Step(const Vector& x, const Vector& u) const = 0;
  // Per-step cost l(x_t, u_t); u is clamped the same way as in Step.
  virtual double Cost(const Vector& x, const Vector& u, int t) const = 0;
  // Success predicate on the final state x_T.
  virtual bool Success(const Vector& final_state) const = 0;

  virtual double action_limit() const = 0;
  Vector ClampAction(const Vector& u) const;

  bool Success(const Trajectory& trajectory) const {
    return Success(trajectory.states.back());
  }
};

struct PointMassParams {
  double dt = 0.05;
  int horizon = 100;
  double w_pos = 1.0;
  double w_vel = 0.1;
  double w_u = 1e-3;
  double action_limit = 10.0;
  double success_tolerance = 0.1;

  bool operator==(const PointMassParams&) const = default;
};

// State (p_x, p_y, v_x, v_y); action is a 2D acceleration.
class PointMassEnv final : public Environment {
 public:
  PointMassEnv(PointMassParams params, Instance instance);

  int state_dim() const override { return 4; }
  int action_dim() const override { return 2; }
  int horizon() const override { return params_.horizon; }
  double action_limit() const override { return params_.action_limit; }

  Vector InitialState() const override;
  Vector Step(const Vector& x, const Vector& u) const override;
  double Cost(const Vector& x, const Vector& u, int t) const override;
  bool Success(const Vector& final_state) const override;
  using Environment::Success;

  const PointMassParams& params() const { return params_; }
  const Vector& goal() const { return instance_.target; }

 private:
  PointMassParams params_;
  Instance instance_;
};

struct LatchParams {
  double dt = 0.05;
  int horizon = 100;
  double engage_radius = 0.15;
  double required_displacement = 0.2;
  double failure_penalty = 50.0;
  // Penalty applies from this step on while the latch is not yet open.
  int deadline = 70;
  double w_u = 1e-3;
  double w_vel = 0.01;
  double action_limit = 10.0;

  bool operator==(const LatchParams&) const = default;
};

// State (p_x, p_y, v_x, v_y, s, l_x, l_y): agent position and velocity,
// latch displacement s along +x, and the latch rest position (constant,
// included so that a global policy can observe the task condition).
//
// The handle sits at l + s e_x. While the agent is within the engage radius
// of the handle and behind it, any agent motion along +x pushes the handle by
// the same amount. Elsewhere s is unchanged.
class LatchEnv final : public Environment {
 public:
  static constexpr int kDisplacement = 4;

  LatchEnv(LatchParams params, Instance instance);

  int state_dim() const override { return 7; }
  int action_dim() const override { return 2; }
  int horizon() const override { return params_.horizon; }
  double action_limit() const override { return params_.action_limit; }

  Vector InitialState() const override;
  Vector Step(const Vector& x, const Vector& u) const override;
  double Cost(const Vector& x, const Vector& u, int t) const override;
  bool Success(const Vector& final_state) const override;
  using Environment::Success;

  bool Engaged(const Vector& x) const;
  const LatchParams& params() const { return params_; }

 private:
  LatchParams params_;
  Instance instance_;
};

enum class TaskKind { kPointMass, kLatch };

std::string ToString(TaskKind kind);
TaskKind ParseTaskKind(const std::string& name);

// Task family plus its instance distribution.
struct TaskSpec {
  TaskKind kind = TaskKind::kPointMass;
  PointMassParams point_mass;
  LatchParams latch;
  InstanceDistribution instances;

  bool operator==(const TaskSpec&) const = default;

  std::unique_ptr<Environment> Make(const Instance& instance) const;
  int state_dim() const { return kind == TaskKind::kPointMass ? 4 : 7; }
  int action_dim() const { return 2; }
  int horizon() const {
    return kind == TaskKind::kPointMass ? point_mass.horizon : latch.horizon;
  }
};

// Runs the policy from env.InitialState(). With `noiseless` the mean action
// is applied and the recorded noise is zero.
Trajectory Rollout(const Environment& env, const StochasticPolicy& policy,
                   Rng& rng, bool noiseless = false);
Trajectory Rollout(const Environment& env, const StochasticPolicy& policy,
                   uint64_t seed, bool noiseless = false);

}  // namespace pigps

#endif  // PIGPS_ENVS_HPP_
