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

// Path-integral policy improvement for the feedforward terms and covariances
// of a linear-Gaussian controller. Feedback gains are left untouched.
//
// Per timestep t the samples are weighted by a softmax of their negative
// cost-to-go, with the temperature eta_t chosen by minimizing the dual
//
//   g(eta) = eta * epsilon + eta * log(1/N sum_i exp(-S_i / eta)),
//
// whose stationary point is where KL(weights || uniform) == epsilon.

#ifndef PIGPS_PI2_HPP_
#define PIGPS_PI2_HPP_

#include <optional>

#include "common.hpp"
#include "controllers.hpp"

namespace pigps {

// Maximum per-timestep KL divergence between successive policies.
class KlBound {
 public:
  explicit KlBound(double epsilon);
  double epsilon() const { return epsilon_; }

 private:
  double epsilon_;
};

// S(i, t): cost of sample i from timestep t to the end of the horizon.
struct CostToGoTable {
  Matrix values;  // N x T
};

// P(i, t) sums to one over i for every t; eta(t) is that column's temperature.
struct WeightTable {
  Matrix probabilities;  // N x T
  Vector eta;            // T
};

struct EtaSearch {
  double eta_min = 1e-4;
  double eta_max = 1e6;
  int iterations = 200;
};

CostToGoTable CostToGo(const SampleSet& samples);
// Same computation from an N x T matrix of per-step costs.
CostToGoTable CostToGo(const Matrix& step_costs);

// exp(-S_i / eta) normalized, evaluated after subtracting min(S).
Vector SoftmaxWeights(const Vector& cost_to_go, double eta);

double DualValue(const Vector& cost_to_go, double eta, double epsilon);

// sum_i P_i log(N P_i).
double KlToUniform(const Vector& probabilities);

// Golden-section minimization of the dual over log(eta), with eta in
// [eta_min, eta_max] times the spread max S - min S. Returns eta_max when all
// costs are equal and the upper end when the dual is still decreasing there.
double SolveEta(const Vector& cost_to_go, const KlBound& bound,
                const EtaSearch& search = {});

WeightTable ComputeWeights(const CostToGoTable& cost_to_go, const KlBound& bound,
                           const EtaSearch& search = {});

// Adds weight * KL(sampler(.|x) || reference(.|x)) to each per-step cost.
struct KlPenalty {
  double weight = 0.0;
  const StochasticPolicy* reference = nullptr;
};

struct Pi2Result {
  LinGaussPolicy policy;
  WeightTable weights;
  CostToGoTable cost_to_go;
};

// Realized feedforwards k_{i,t} = u_{i,t} - K_t x_{i,t}, indexed [t][i].
std::vector<std::vector<Vector>> RealizedFeedforwards(const LinGaussPolicy& policy,
                                                      const SampleSet& samples);

// One PI2 step. `policy` must be the controller the samples were drawn from.
// New k_t is the P-weighted mean of the realized feedforwards, new C_t their
// P-weighted outer-product estimate floored to `covariance_floor`.
Pi2Result Pi2Update(const LinGaussPolicy& policy, const SampleSet& samples,
                    const KlBound& bound,
                    const std::optional<KlPenalty>& penalty = std::nullopt,
                    double covariance_floor = kCovarianceFloor,
                    const EtaSearch& search = {});

// The weighted-MLE half of Pi2Update with caller-supplied N x T
// probabilities (each column summing to one).
LinGaussPolicy Pi2Refit(const LinGaussPolicy& policy, const SampleSet& samples,
                        const Matrix& probabilities,
                        double covariance_floor = kCovarianceFloor);

}  // namespace pigps

#endif  // PIGPS_PI2_HPP_
