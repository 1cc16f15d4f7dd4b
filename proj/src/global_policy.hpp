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

// Neural-network global policy: a fully connected ReLU mean network with a
// time-varying Gaussian noise covariance, trained by supervised regression
// onto local controllers.

#ifndef PIGPS_GLOBAL_POLICY_HPP_
#define PIGPS_GLOBAL_POLICY_HPP_

#include <cstdint>
#include <vector>

#include "common.hpp"
#include "controllers.hpp"
#include "pi2.hpp"

namespace pigps {

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;     // out
};

class MlpPolicy final : public StochasticPolicy {
 public:
  // Hidden layers use ReLU; the output layer is linear.
  MlpPolicy(std::vector<DenseLayer> layers, std::vector<Matrix> noise_covariances);

  // Weights uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases, noise
  // covariance noise_variance * I at every step.
  static MlpPolicy Create(int state_dim, int action_dim, const std::vector<int>& hidden,
                          int horizon, double noise_variance, uint64_t seed);

  int horizon() const override { return static_cast<int>(noise_.size()); }
  int state_dim() const override { return static_cast<int>(layers_.front().weights.cols()); }
  int action_dim() const override { return static_cast<int>(layers_.back().weights.rows()); }

  Vector Mean(int t, const Vector& x) const override;
  const Matrix& Covariance(int t) const override { return noise_.at(t); }
  const Matrix& CovarianceFactor(int t) const override { return factors_.at(t); }

  Vector Forward(const Vector& x) const;
  // Columns of `inputs` are states; returns one action mean per column.
  Matrix ForwardBatch(const Matrix& inputs) const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  const std::vector<Matrix>& noise_covariances() const { return noise_; }

  Eigen::Index ParameterCount() const;
  // Per layer: weights (column-major) then bias.
  Vector Parameters() const;
  MlpPolicy WithParameters(const Vector& params) const;
  MlpPolicy WithNoise(std::vector<Matrix> noise_covariances) const;

 private:
  std::vector<DenseLayer> layers_;
  std::vector<Matrix> noise_;
  std::vector<Matrix> factors_;
};

// One regression target: the mean action `target` at `state`, weighted by
// `weight` and the action precision matrix.
struct SupervisedSample {
  Vector state;
  Vector target;
  Matrix precision;
  double weight = 1.0;
};

using SupervisedSet = std::vector<SupervisedSample>;

// sum_j w_j e_j^T P_j e_j / sum_j w_j with e_j = mean(x_j) - target_j.
double SupervisedLoss(const MlpPolicy& policy, const SupervisedSet& data);

// Gradient of the loss restricted to data[indices] (normalized by their
// weight sum), in the Parameters() layout.
Vector SupervisedGradient(const MlpPolicy& policy, const SupervisedSet& data,
                          const std::vector<std::size_t>& indices);

// Divides every precision by one common positive constant so that the mean
// of trace(P) / action_dim is one. The minimizer of the loss is unchanged.
void NormalizePrecisions(SupervisedSet& data);

struct TrainOptions {
  double learning_rate = 5e-3;
  int epochs = 20;
  int batch_size = 64;
  double momentum = 0.9;
  uint64_t seed = 0;
};

struct TrainResult {
  MlpPolicy policy;
  double initial_loss;
  double final_loss;
};

// Mini-batch SGD with momentum over a seeded shuffle per epoch. The returned
// parameters are the best seen at an epoch boundary (the start included), so
// final_loss <= initial_loss.
TrainResult TrainSupervised(const MlpPolicy& policy, const SupervisedSet& data,
                            const TrainOptions& options);

// C_pi,t = mean over locals of C_t.
MlpPolicy UpdateNoise(const MlpPolicy& policy, const std::vector<LinGaussPolicy>& locals);

// Targets local.Mean(t, x_{i,t}) with precision C_t^{-1}. `weights`, when
// given, supplies w_{i,t} = P(i, t); otherwise every weight is one.
SupervisedSet BuildDistillationSet(const LinGaussPolicy& local, const SampleSet& samples,
                                   const Matrix* weights = nullptr);

// Targets the sampled actions u_{i,t} with identity precision and weights P(i, t).
SupervisedSet BuildRepsSet(const SampleSet& samples, const Matrix& weights);

// REPS-style training: per instance the samples are reweighted by the
// per-timestep dual solution and the global policy regresses directly onto
// the sampled actions.
TrainResult RepsTrain(const MlpPolicy& policy, const std::vector<SampleSet>& samples,
                      const KlBound& bound, const TrainOptions& options);

// PI-GPS-W: regression onto updated local means, weighted by the PI2
// probabilities of the samples they were computed from.
TrainResult PiGpsWTrain(const MlpPolicy& policy, const std::vector<LinGaussPolicy>& locals,
                        const std::vector<SampleSet>& samples,
                        const std::vector<Matrix>& weights, const TrainOptions& options);

}  // namespace pigps

#endif  // PIGPS_GLOBAL_POLICY_HPP_
