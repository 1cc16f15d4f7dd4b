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

// Model-based local optimizer used as a comparison baseline: time-varying
// linear dynamics are fitted to samples, the cost is expanded to second
// order around the sample means, and a backward pass minimizes
// E[cost] + eta * KL(new || prev) with one trajectory-level eta.

#ifndef PIGPS_LQR_BASELINE_HPP_
#define PIGPS_LQR_BASELINE_HPP_

#include <limits>
#include <vector>

#include "common.hpp"
#include "controllers.hpp"
#include "envs.hpp"
#include "pi2.hpp"

namespace pigps {

// x_{t+1} ~ N(A_t x_t + B_t u_t + c_t, noise_t), x_0 ~ N(initial_mean, initial_cov).
struct LinearDynamics {
  std::vector<Matrix> A;
  std::vector<Matrix> B;
  std::vector<Vector> c;
  std::vector<Matrix> noise;
  Vector initial_mean;
  Matrix initial_cov;

  int horizon() const { return static_cast<int>(A.size()); }
};

struct DynamicsFitOptions {
  // Pseudo-sample weight pulling each fit toward the previous one.
  double prior_strength = 1.0;
  // Ridge weight on all regression coefficients.
  double ridge = 1e-6;
};

// Per-timestep ridge regression of x_{t+1} on [x_t; u_t; 1], minimizing
//   sum_i |x_{t+1} - W z_i|^2 + ridge |W|^2 + prior_strength |W - W_prior|^2.
// Without a prior the last term is dropped. Actions are clamped to
// `action_limit` first so the regressors match what was applied.
LinearDynamics FitDynamics(const SampleSet& samples, const DynamicsFitOptions& options,
                           const LinearDynamics* prior = nullptr,
                           double action_limit = std::numeric_limits<double>::infinity());

// l(x, u) ~= 1/2 [x;u]^T H [x;u] + g^T [x;u] + const per timestep, in absolute
// coordinates.
struct QuadraticCostExpansion {
  std::vector<Matrix> lxx, luu, lux;
  std::vector<Vector> lx, lu;

  int horizon() const { return static_cast<int>(lxx.size()); }
};

// Central finite differences of env.Cost around the per-timestep sample mean
// of (x_t, u_t). The uu block is lifted to eigenvalues >= uu_floor.
QuadraticCostExpansion ExpandCost(const Environment& env, const SampleSet& samples,
                                  double step = 1e-3, double uu_floor = 1e-6);

struct LqrOptions {
  double eta_min = 1e-8;
  double eta_max = 1e16;
  int max_bisections = 200;
  double covariance_floor = kCovarianceFloor;
};

struct LqrResult {
  LinGaussPolicy policy;
  double eta;
  double kl;  // expected trajectory KL(new || prev) under the model
};

// Backward pass for a fixed eta.
LinGaussPolicy LqrBackwardPass(const LinearDynamics& dynamics,
                               const QuadraticCostExpansion& cost,
                               const LinGaussPolicy& prev, double eta,
                               double covariance_floor = kCovarianceFloor);

// sum_t E_{x_t under new}[KL(new(.|x_t) || prev(.|x_t))] with x_t propagated
// through the linear-Gaussian model.
double ExpectedTrajectoryKl(const LinearDynamics& dynamics, const LinGaussPolicy& next,
                            const LinGaussPolicy& prev);

// Bisects log(eta) until the trajectory KL lies in [0.9, 1.1] * T * epsilon.
// If even eta_min stays below that band the bound is slack and the eta_min
// policy is returned. If eta_max still exceeds it, throws with the
// achievable KL range.
LqrResult LqrBackwardKl(const LinearDynamics& dynamics, const QuadraticCostExpansion& cost,
                        const LinGaussPolicy& prev, const KlBound& bound,
                        const LqrOptions& options = {});

}  // namespace pigps

#endif  // PIGPS_LQR_BASELINE_HPP_
