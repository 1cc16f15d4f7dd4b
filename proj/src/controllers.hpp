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

// Time-varying linear-Gaussian controllers, sampled trajectories and
// closed-form KL divergences between conditional Gaussian action models.
//
// Timesteps are zero-based throughout: a horizon-T trajectory has states
// x_0..x_T and actions u_0..u_{T-1}.

#ifndef PIGPS_CONTROLLERS_HPP_
#define PIGPS_CONTROLLERS_HPP_

#include <cstdint>
#include <vector>

#include "common.hpp"
#include "rng.hpp"

namespace pigps {

// A conditional Gaussian action model p(u | x, t) = N(mean(t, x), C_t).
// Implemented by local controllers and by the neural-network global policy.
class StochasticPolicy {
 public:
  virtual ~StochasticPolicy() = default;

  virtual int horizon() const = 0;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;

  virtual Vector Mean(int t, const Vector& x) const = 0;
  virtual const Matrix& Covariance(int t) const = 0;
  // Lower Cholesky factor of Covariance(t). Zero for a deterministic step.
  virtual const Matrix& CovarianceFactor(int t) const = 0;
};

// p(u_t | x_t) = N(K_t x_t + k_t, C_t).
//
// Each C_t must be symmetric and either positive definite or exactly zero
// (a deterministic step). Covariance flooring is the caller's job; this type
// never repairs its input.
class LinGaussPolicy final : public StochasticPolicy {
 public:
  LinGaussPolicy(std::vector<Matrix> gains, std::vector<Vector> offsets,
                 std::vector<Matrix> covariances);

  int horizon() const override { return static_cast<int>(gains_.size()); }
  int state_dim() const override { return static_cast<int>(gains_[0].cols()); }
  int action_dim() const override { return static_cast<int>(gains_[0].rows()); }

  Vector Mean(int t, const Vector& x) const override;
  const Matrix& Covariance(int t) const override { return covariances_.at(t); }
  const Matrix& CovarianceFactor(int t) const override { return factors_.at(t); }

  const std::vector<Matrix>& gains() const { return gains_; }
  const std::vector<Vector>& offsets() const { return offsets_; }
  const std::vector<Matrix>& covariances() const { return covariances_; }

 private:
  std::vector<Matrix> gains_;
  std::vector<Vector> offsets_;
  std::vector<Matrix> covariances_;
  std::vector<Matrix> factors_;
};

struct Trajectory {
  std::vector<Vector> states;   // T + 1
  std::vector<Vector> actions;  // T, as drawn (before any actuator clamp)
  std::vector<Vector> noise;    // T standard-normal draws
  std::vector<double> costs;    // T

  int horizon() const { return static_cast<int>(actions.size()); }
};

// N rollouts of one task instance.
using SampleSet = std::vector<Trajectory>;

// Throws unless every trajectory has consistent lengths for one horizon.
// Returns that horizon.
int ValidateSamples(const SampleSet& samples);

// Symmetrizes C and clamps its eigenvalues to at least `floor`.
Matrix FloorCovariance(const Matrix& covariance, double floor = kCovarianceFloor);

// Lower Cholesky factor of a positive definite matrix; throws otherwise.
Matrix CholeskyFactor(const Matrix& covariance, const char* what);

struct ActionDraw {
  Vector action;
  Vector noise;
};

// mean(t, x) + L_t z with z drawn from `rng`.
ActionDraw SampleAction(const StochasticPolicy& policy, int t, const Vector& x,
                        Rng& rng);
Vector SampleAction(const StochasticPolicy& policy, int t, const Vector& x,
                    uint64_t seed);

// KL(N(mean_p, L_p L_p^T) || N(mean_q, L_q L_q^T)) given lower factors.
double GaussianKl(const Vector& mean_p, const Matrix& factor_p,
                  const Vector& mean_q, const Matrix& factor_q);

// KL(p(. | x) || q(. | x)) at timestep t.
double PolicyStepKl(const StochasticPolicy& p, const StochasticPolicy& q, int t,
                    const Vector& x);

// sum_t mean_i KL(p(. | x_{i,t}) || q(. | x_{i,t})) over the sampled states.
double TrajectoryKl(const StochasticPolicy& p, const StochasticPolicy& q,
                    const SampleSet& samples);

}  // namespace pigps

#endif  // PIGPS_CONTROLLERS_HPP_
