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

#include "global_policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rng.hpp"

namespace pigps {

namespace {
void AssignParameters(std::vector<DenseLayer>& layers, const Vector& params);
}  // namespace

MlpPolicy::MlpPolicy(std::vector<DenseLayer> layers, std::vector<Matrix> noise_covariances)
    : layers_(std::move(layers)), noise_(std::move(noise_covariances)) {
  if (layers_.empty()) ThrowInvalid("MlpPolicy needs at least one layer");
  if (noise_.empty()) ThrowInvalid("MlpPolicy needs a noise covariance per timestep");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    CheckDim(layer.bias.size(), layer.weights.rows(), "MlpPolicy bias");
    if (l > 0) CheckDim(layer.weights.cols(), layers_[l - 1].weights.rows(), "MlpPolicy layer input");
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
      ThrowNumeric("MlpPolicy: non-finite parameters in layer " + std::to_string(l));
    }
  }
  const Eigen::Index du = layers_.back().weights.rows();
  factors_.reserve(noise_.size());
  for (std::size_t t = 0; t < noise_.size(); ++t) {
    CheckDim(noise_[t].rows(), du, "MlpPolicy noise rows");
    CheckDim(noise_[t].cols(), du, "MlpPolicy noise cols");
    factors_.push_back(CholeskyFactor(noise_[t], "MlpPolicy noise"));
  }
}

MlpPolicy MlpPolicy::Create(int state_dim, int action_dim, const std::vector<int>& hidden,
                            int horizon, double noise_variance, uint64_t seed) {
  if (state_dim < 1 || action_dim < 1 || horizon < 1) {
    ThrowInvalid("MlpPolicy::Create: dimensions and horizon must be >= 1");
  }
  if (!(noise_variance > 0.0)) ThrowInvalid("MlpPolicy::Create: noise variance must be > 0");
  Rng rng(seed);
  std::vector<int> widths{state_dim};
  for (int h : hidden) {
    if (h < 1) ThrowInvalid("MlpPolicy::Create: hidden widths must be >= 1");
    widths.push_back(h);
  }
  widths.push_back(action_dim);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int in = widths[l];
    const int out = widths[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    DenseLayer layer{Matrix(out, in), Vector::Zero(out)};
    for (int j = 0; j < in; ++j) {
      for (int i = 0; i < out; ++i) layer.weights(i, j) = rng.Uniform(-limit, limit);
    }
    layers.push_back(std::move(layer));
  }
  std::vector<Matrix> noise(horizon, noise_variance * Matrix::Identity(action_dim, action_dim));
  return MlpPolicy(std::move(layers), std::move(noise));
}

Vector MlpPolicy::Forward(const Vector& x) const {
  CheckDim(x.size(), state_dim(), "MlpPolicy input");
  Vector a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Vector z = layers_[l].weights * a + layers_[l].bias;
    if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

Matrix MlpPolicy::ForwardBatch(const Matrix& inputs) const {
  CheckDim(inputs.rows(), state_dim(), "MlpPolicy batch input");
  Matrix a = inputs;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix z = layers_[l].weights * a;
    z.colwise() += layers_[l].bias;
    if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

Vector MlpPolicy::Mean(int t, const Vector& x) const {
  if (t < 0 || t >= horizon()) ThrowInvalid("MlpPolicy: timestep out of range");
  return Forward(x);
}

Eigen::Index MlpPolicy::ParameterCount() const {
  Eigen::Index n = 0;
  for (const DenseLayer& layer : layers_) n += layer.weights.size() + layer.bias.size();
  return n;
}

Vector MlpPolicy::Parameters() const {
  Vector p(ParameterCount());
  Eigen::Index offset = 0;
  for (const DenseLayer& layer : layers_) {
    p.segment(offset, layer.weights.size()) = layer.weights.reshaped();
    offset += layer.weights.size();
    p.segment(offset, layer.bias.size()) = layer.bias;
    offset += layer.bias.size();
  }
  return p;
}

MlpPolicy MlpPolicy::WithParameters(const Vector& params) const {
  CheckDim(params.size(), ParameterCount(), "MlpPolicy parameters");
  std::vector<DenseLayer> layers = layers_;
  AssignParameters(layers, params);
  return MlpPolicy(std::move(layers), noise_);
}

MlpPolicy MlpPolicy::WithNoise(std::vector<Matrix> noise_covariances) const {
  return MlpPolicy(layers_, std::move(noise_covariances));
}

namespace {

void CheckSet(const MlpPolicy& policy, const SupervisedSet& data) {
  if (data.empty()) ThrowInvalid("supervised set is empty");
  for (const SupervisedSample& s : data) {
    CheckDim(s.state.size(), policy.state_dim(), "supervised state");
    CheckDim(s.target.size(), policy.action_dim(), "supervised target");
    CheckDim(s.precision.rows(), policy.action_dim(), "supervised precision");
    if (!(s.weight >= 0.0)) ThrowInvalid("supervised weights must be >= 0");
  }
}

// Loss and (optionally) gradient over a subset, in one batched pass.
double LossAndGradient(const std::vector<DenseLayer>& layers, const SupervisedSet& data,
                       const std::vector<std::size_t>& indices, Vector* gradient) {
  const auto batch = static_cast<Eigen::Index>(indices.size());
  Matrix inputs(layers.front().weights.cols(), batch);
  double weight_sum = 0.0;
  for (Eigen::Index j = 0; j < batch; ++j) {
    inputs.col(j) = data[indices[j]].state;
    weight_sum += data[indices[j]].weight;
  }
  if (!(weight_sum > 0.0)) ThrowInvalid("supervised weights sum to zero");

  // activations[l] is the input to layer l; pre[l] its pre-activation.
  std::vector<Matrix> activations{inputs};
  std::vector<Matrix> pre;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix z = layers[l].weights * activations.back();
    z.colwise() += layers[l].bias;
    pre.push_back(z);
    activations.push_back(l + 1 < layers.size() ? Matrix(z.cwiseMax(0.0)) : z);
  }
  const Matrix& out = activations.back();

  double loss = 0.0;
  Matrix delta(out.rows(), batch);
  for (Eigen::Index j = 0; j < batch; ++j) {
    const SupervisedSample& s = data[indices[j]];
    const Vector e = out.col(j) - s.target;
    const Vector pe = s.precision * e;
    loss += s.weight * e.dot(pe);
    delta.col(j) = (2.0 * s.weight / weight_sum) * pe;
  }
  loss /= weight_sum;
  if (gradient == nullptr) return loss;

  Eigen::Index count = 0;
  for (const DenseLayer& layer : layers) count += layer.weights.size() + layer.bias.size();
  gradient->resize(count);
  std::vector<Vector> pieces(layers.size() * 2);
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Matrix grad_w = delta * activations[l].transpose();
    pieces[2 * l] = grad_w.reshaped();
    pieces[2 * l + 1] = delta.rowwise().sum();
    if (l > 0) {
      Matrix back = layers[l].weights.transpose() * delta;
      delta = back.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  Eigen::Index offset = 0;
  for (const Vector& piece : pieces) {
    gradient->segment(offset, piece.size()) = piece;
    offset += piece.size();
  }
  return loss;
}

void AssignParameters(std::vector<DenseLayer>& layers, const Vector& params) {
  Eigen::Index offset = 0;
  for (DenseLayer& layer : layers) {
    layer.weights.reshaped() = params.segment(offset, layer.weights.size());
    offset += layer.weights.size();
    layer.bias = params.segment(offset, layer.bias.size());
    offset += layer.bias.size();
  }
}

std::vector<std::size_t> AllIndices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

}  // namespace

double SupervisedLoss(const MlpPolicy& policy, const SupervisedSet& data) {
  CheckSet(policy, data);
  return LossAndGradient(policy.layers(), data, AllIndices(data.size()), nullptr);
}

Vector SupervisedGradient(const MlpPolicy& policy, const SupervisedSet& data,
                          const std::vector<std::size_t>& indices) {
  CheckSet(policy, data);
  for (std::size_t i : indices) {
    if (i >= data.size()) ThrowInvalid("SupervisedGradient: index out of range");
  }
  Vector g;
  LossAndGradient(policy.layers(), data, indices, &g);
  return g;
}

void NormalizePrecisions(SupervisedSet& data) {
  if (data.empty()) return;
  double mean_trace = 0.0;
  for (const SupervisedSample& s : data) {
    mean_trace += s.precision.trace() / static_cast<double>(s.precision.rows());
  }
  mean_trace /= static_cast<double>(data.size());
  if (!(mean_trace > 0.0) || !std::isfinite(mean_trace)) {
    ThrowNumeric("NormalizePrecisions: precisions must have positive finite trace");
  }
  for (SupervisedSample& s : data) s.precision /= mean_trace;
}

TrainResult TrainSupervised(const MlpPolicy& policy, const SupervisedSet& data,
                            const TrainOptions& options) {
  CheckSet(policy, data);
  if (options.batch_size < 1 || options.epochs < 0 || !(options.learning_rate > 0.0)) {
    ThrowInvalid("TrainSupervised: invalid options");
  }
  const std::vector<std::size_t> all = AllIndices(data.size());
  const double initial = LossAndGradient(policy.layers(), data, all, nullptr);
  if (!std::isfinite(initial)) ThrowNumeric("TrainSupervised: initial loss is not finite");

  Vector params = policy.Parameters();
  Vector velocity = Vector::Zero(params.size());
  Vector best_params = params;
  double best_loss = initial;
  std::vector<DenseLayer> current = policy.layers();
  Rng rng(options.seed);
  std::vector<std::size_t> order = all;
  std::vector<std::size_t> batch;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    // Fisher-Yates with the library stream keeps shuffles portable.
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.NextU64() % i);
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t stop = std::min(order.size(), start + options.batch_size);
      batch.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                   order.begin() + static_cast<std::ptrdiff_t>(stop));
      double wsum = 0.0;
      for (std::size_t i : batch) wsum += data[i].weight;
      if (wsum <= 0.0) continue;
      Vector grad;
      LossAndGradient(current, data, batch, &grad);
      velocity = options.momentum * velocity - options.learning_rate * grad;
      params += velocity;
      if (!params.allFinite()) {
        ThrowNumeric("TrainSupervised: parameters diverged; reduce the learning rate");
      }
      AssignParameters(current, params);
    }
    const double loss = LossAndGradient(current, data, all, nullptr);
    if (!std::isfinite(loss)) {
      ThrowNumeric("TrainSupervised: loss diverged (NaN); reduce the learning rate");
    }
    if (loss < best_loss) {
      best_loss = loss;
      best_params = params;
    }
  }
  return TrainResult{policy.WithParameters(best_params), initial, best_loss};
}

MlpPolicy UpdateNoise(const MlpPolicy& policy, const std::vector<LinGaussPolicy>& locals) {
  if (locals.empty()) ThrowInvalid("UpdateNoise: no local policies");
  const int horizon = policy.horizon();
  std::vector<Matrix> noise(horizon, Matrix::Zero(policy.action_dim(), policy.action_dim()));
  for (const LinGaussPolicy& local : locals) {
    if (local.horizon() != horizon) ThrowInvalid("UpdateNoise: local policy horizon mismatch");
    CheckDim(local.action_dim(), policy.action_dim(), "UpdateNoise action dim");
    for (int t = 0; t < horizon; ++t) noise[t] += local.Covariance(t);
  }
  const double inv = 1.0 / static_cast<double>(locals.size());
  for (Matrix& c : noise) {
    c *= inv;
    c = 0.5 * (c + c.transpose());
  }
  return policy.WithNoise(std::move(noise));
}

SupervisedSet BuildDistillationSet(const LinGaussPolicy& local, const SampleSet& samples,
                                   const Matrix* weights) {
  const int horizon = ValidateSamples(samples);
  if (horizon > local.horizon()) ThrowInvalid("distillation samples longer than local horizon");
  if (weights != nullptr) {
    CheckDim(weights->rows(), static_cast<Eigen::Index>(samples.size()), "distillation weight rows");
    CheckDim(weights->cols(), horizon, "distillation weight cols");
  }
  const int du = local.action_dim();
  std::vector<Matrix> precisions(horizon);
  for (int t = 0; t < horizon; ++t) {
    precisions[t] = Eigen::LLT<Matrix>(local.Covariance(t)).solve(Matrix::Identity(du, du));
  }
  SupervisedSet data;
  data.reserve(samples.size() * horizon);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (int t = 0; t < horizon; ++t) {
      const Vector& x = samples[i].states[t];
      const double w = weights ? (*weights)(static_cast<Eigen::Index>(i), t) : 1.0;
      data.push_back({x, local.Mean(t, x), precisions[t], w});
    }
  }
  return data;
}

SupervisedSet BuildRepsSet(const SampleSet& samples, const Matrix& weights) {
  const int horizon = ValidateSamples(samples);
  CheckDim(weights.rows(), static_cast<Eigen::Index>(samples.size()), "REPS weight rows");
  CheckDim(weights.cols(), horizon, "REPS weight cols");
  const Eigen::Index du = samples[0].actions[0].size();
  const Matrix identity = Matrix::Identity(du, du);
  SupervisedSet data;
  data.reserve(samples.size() * horizon);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (int t = 0; t < horizon; ++t) {
      data.push_back({samples[i].states[t], samples[i].actions[t], identity,
                      weights(static_cast<Eigen::Index>(i), t)});
    }
  }
  return data;
}

TrainResult RepsTrain(const MlpPolicy& policy, const std::vector<SampleSet>& samples,
                      const KlBound& bound, const TrainOptions& options) {
  if (samples.empty()) ThrowInvalid("RepsTrain: no samples");
  SupervisedSet data;
  for (const SampleSet& set : samples) {
    const WeightTable w = ComputeWeights(CostToGo(set), bound);
    SupervisedSet part = BuildRepsSet(set, w.probabilities);
    data.insert(data.end(), part.begin(), part.end());
  }
  return TrainSupervised(policy, data, options);
}

TrainResult PiGpsWTrain(const MlpPolicy& policy, const std::vector<LinGaussPolicy>& locals,
                        const std::vector<SampleSet>& samples,
                        const std::vector<Matrix>& weights, const TrainOptions& options) {
  if (locals.empty() || locals.size() != samples.size() || weights.size() != samples.size()) {
    ThrowInvalid("PiGpsWTrain: need one local policy and weight table per sample set");
  }
  SupervisedSet data;
  for (std::size_t m = 0; m < locals.size(); ++m) {
    SupervisedSet part = BuildDistillationSet(locals[m], samples[m], &weights[m]);
    data.insert(data.end(), part.begin(), part.end());
  }
  NormalizePrecisions(data);
  return TrainSupervised(policy, data, options);
}

}  // namespace pigps
