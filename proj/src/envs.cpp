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

#include "envs.hpp"

#include <algorithm>
#include <cmath>

namespace pigps {

namespace {

void CheckFinite(const Vector& v, const char* what) {
  if (!v.allFinite()) ThrowNumeric(std::string(what) + " is not finite");
}

void CheckInstance(const Instance& instance) {
  CheckDim(instance.target.size(), 2, "instance target");
  CheckDim(instance.start.size(), 2, "instance start");
  CheckFinite(instance.target, "instance target");
  CheckFinite(instance.start, "instance start");
}

}  // namespace

InstanceDistribution InstanceDistribution::Scaled(double fraction) const {
  InstanceDistribution out = *this;
  const Vector center = TargetCenter();
  const Vector half = 0.5 * fraction * (target_high - target_low);
  out.target_low = center - half;
  out.target_high = center + half;
  return out;
}

void ValidateDistribution(const InstanceDistribution& dist) {
  CheckDim(dist.target_low.size(), 2, "target_low");
  CheckDim(dist.target_high.size(), 2, "target_high");
  CheckDim(dist.start_low.size(), 2, "start_low");
  CheckDim(dist.start_high.size(), 2, "start_high");
  const bool ordered = (dist.target_low.array() <= dist.target_high.array()).all() &&
                       (dist.start_low.array() <= dist.start_high.array()).all();
  const bool finite = dist.target_low.allFinite() && dist.target_high.allFinite() &&
                      dist.start_low.allFinite() && dist.start_high.allFinite();
  if (!ordered || !finite) ThrowInvalid("instance bounds are empty (low > high) or not finite");
}

Instance SampleInstance(const InstanceDistribution& dist, Rng& rng) {
  ValidateDistribution(dist);
  Instance instance{Vector(2), Vector(2)};
  for (int i = 0; i < 2; ++i) {
    instance.target[i] = rng.Uniform(dist.target_low[i], dist.target_high[i]);
  }
  for (int i = 0; i < 2; ++i) {
    instance.start[i] = rng.Uniform(dist.start_low[i], dist.start_high[i]);
  }
  return instance;
}

Instance SampleInstance(const InstanceDistribution& dist, uint64_t seed) {
  Rng rng(seed);
  return SampleInstance(dist, rng);
}

Vector Environment::ClampAction(const Vector& u) const {
  const double lim = action_limit();
  return u.cwiseMax(-lim).cwiseMin(lim);
}

// ---------------------------------------------------------------------------
// Point mass

PointMassEnv::PointMassEnv(PointMassParams params, Instance instance)
    : params_(params), instance_(std::move(instance)) {
  if (!(params_.dt > 0.0)) ThrowInvalid("point mass: dt must be > 0");
  if (params_.horizon < 1) ThrowInvalid("point mass: horizon must be >= 1");
  if (params_.w_pos < 0 || params_.w_vel < 0 || params_.w_u < 0) {
    ThrowInvalid("point mass: cost weights must be >= 0");
  }
  CheckInstance(instance_);
}

Vector PointMassEnv::InitialState() const {
  Vector x = Vector::Zero(4);
  x.head<2>() = instance_.start;
  return x;
}

Vector PointMassEnv::Step(const Vector& x, const Vector& u) const {
  CheckDim(x.size(), 4, "point mass state");
  CheckDim(u.size(), 2, "point mass action");
  CheckFinite(x, "point mass state");
  CheckFinite(u, "point mass action");
  const Vector a = ClampAction(u);
  const double dt = params_.dt;
  Vector next(4);
  next.head<2>() = x.head<2>() + x.tail<2>() * dt + 0.5 * a * dt * dt;
  next.tail<2>() = x.tail<2>() + a * dt;
  return next;
}

double PointMassEnv::Cost(const Vector& x, const Vector& u, int /*t*/) const {
  CheckDim(x.size(), 4, "point mass state");
  CheckDim(u.size(), 2, "point mass action");
  const Vector a = ClampAction(u);
  const double c = params_.w_pos * (x.head<2>() - instance_.target).squaredNorm() +
                   params_.w_vel * x.tail<2>().squaredNorm() +
                   params_.w_u * a.squaredNorm();
  if (!std::isfinite(c)) ThrowNumeric("point mass cost is not finite");
  return c;
}

bool PointMassEnv::Success(const Vector& final_state) const {
  CheckDim(final_state.size(), 4, "point mass state");
  return (final_state.head<2>() - instance_.target).norm() <= params_.success_tolerance;
}

// ---------------------------------------------------------------------------
// Latch

LatchEnv::LatchEnv(LatchParams params, Instance instance)
    : params_(params), instance_(std::move(instance)) {
  if (!(params_.dt > 0.0)) ThrowInvalid("latch: dt must be > 0");
  if (params_.horizon < 1) ThrowInvalid("latch: horizon must be >= 1");
  if (!(params_.engage_radius > 0.0)) ThrowInvalid("latch: engage radius must be > 0");
  if (!(params_.required_displacement > 0.0)) {
    ThrowInvalid("latch: required displacement must be > 0");
  }
  if (params_.w_u < 0 || params_.w_vel < 0 || params_.failure_penalty < 0) {
    ThrowInvalid("latch: cost weights must be >= 0");
  }
  CheckInstance(instance_);
}

Vector LatchEnv::InitialState() const {
  Vector x = Vector::Zero(7);
  x.head<2>() = instance_.start;
  x.tail<2>() = instance_.target;
  return x;
}

bool LatchEnv::Engaged(const Vector& x) const {
  const Vector handle = instance_.target + Vector::Unit(2, 0) * x[kDisplacement];
  const Vector rel = handle - x.head<2>();
  return rel.norm() <= params_.engage_radius && rel[0] >= 0.0;
}

Vector LatchEnv::Step(const Vector& x, const Vector& u) const {
  CheckDim(x.size(), 7, "latch state");
  CheckDim(u.size(), 2, "latch action");
  CheckFinite(x, "latch state");
  CheckFinite(u, "latch action");
  const Vector a = ClampAction(u);
  const double dt = params_.dt;
  Vector next = x;
  next.head<2>() = x.head<2>() + x.segment<2>(2) * dt + 0.5 * a * dt * dt;
  next.segment<2>(2) = x.segment<2>(2) + a * dt;
  if (Engaged(x)) {
    next[kDisplacement] = x[kDisplacement] + std::max(0.0, next[0] - x[0]);
  }
  next.tail<2>() = instance_.target;
  return next;
}

double LatchEnv::Cost(const Vector& x, const Vector& u, int t) const {
  CheckDim(x.size(), 7, "latch state");
  CheckDim(u.size(), 2, "latch action");
  const Vector a = ClampAction(u);
  double c = params_.w_u * a.squaredNorm() + params_.w_vel * x.segment<2>(2).squaredNorm();
  if (t >= params_.deadline && x[kDisplacement] < params_.required_displacement) {
    c += params_.failure_penalty;
  }
  if (!std::isfinite(c)) ThrowNumeric("latch cost is not finite");
  return c;
}

bool LatchEnv::Success(const Vector& final_state) const {
  CheckDim(final_state.size(), 7, "latch state");
  return final_state[kDisplacement] >= params_.required_displacement;
}

// ---------------------------------------------------------------------------

std::string ToString(TaskKind kind) {
  return kind == TaskKind::kPointMass ? "point_mass" : "latch";
}

TaskKind ParseTaskKind(const std::string& name) {
  if (name == "point_mass") return TaskKind::kPointMass;
  if (name == "latch") return TaskKind::kLatch;
  throw Error(ErrorCode::kConfig, "unknown environment kind '" + name + "'");
}

std::unique_ptr<Environment> TaskSpec::Make(const Instance& instance) const {
  if (kind == TaskKind::kPointMass) {
    return std::make_unique<PointMassEnv>(point_mass, instance);
  }
  return std::make_unique<LatchEnv>(latch, instance);
}

Trajectory Rollout(const Environment& env, const StochasticPolicy& policy,
                   Rng& rng, bool noiseless) {
  const int horizon = env.horizon();
  if (policy.horizon() < horizon) ThrowInvalid("Rollout: policy horizon shorter than task");
  CheckDim(policy.state_dim(), env.state_dim(), "Rollout policy state dim");
  CheckDim(policy.action_dim(), env.action_dim(), "Rollout policy action dim");
  Trajectory tr;
  tr.states.reserve(horizon + 1);
  tr.actions.reserve(horizon);
  tr.noise.reserve(horizon);
  tr.costs.reserve(horizon);
  Vector x = env.InitialState();
  tr.states.push_back(x);
  for (int t = 0; t < horizon; ++t) {
    Vector z = noiseless ? Vector::Zero(env.action_dim()) : rng.NormalVector(env.action_dim());
    Vector u = policy.Mean(t, x);
    if (!noiseless) u += policy.CovarianceFactor(t) * z;
    tr.costs.push_back(env.Cost(x, u, t));
    x = env.Step(x, u);
    tr.states.push_back(x);
    tr.actions.push_back(std::move(u));
    tr.noise.push_back(std::move(z));
  }
  return tr;
}

Trajectory Rollout(const Environment& env, const StochasticPolicy& policy,
                   uint64_t seed, bool noiseless) {
  Rng rng(seed);
  return Rollout(env, policy, rng, noiseless);
}

}  // namespace pigps
