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

#include "pi2.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pigps {

KlBound::KlBound(double epsilon) : epsilon_(epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    ThrowInvalid("KL bound epsilon must be finite and > 0");
  }
}

CostToGoTable CostToGo(const Matrix& step_costs) {
  const Eigen::Index n = step_costs.rows();
  const Eigen::Index horizon = step_costs.cols();
  if (n < 2) ThrowInvalid("cost-to-go needs at least 2 samples");
  if (horizon < 1) ThrowInvalid("cost-to-go needs T >= 1");
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index t = 0; t < horizon; ++t) {
      if (!std::isfinite(step_costs(i, t))) {
        ThrowNumeric("non-finite cost in sample " + std::to_string(i) +
                     " at timestep " + std::to_string(t));
      }
    }
  }
  CostToGoTable table{Matrix(n, horizon)};
  table.values.col(horizon - 1) = step_costs.col(horizon - 1);
  for (Eigen::Index t = horizon - 2; t >= 0; --t) {
    table.values.col(t) = table.values.col(t + 1) + step_costs.col(t);
  }
  return table;
}

CostToGoTable CostToGo(const SampleSet& samples) {
  const int horizon = ValidateSamples(samples);
  Matrix costs(static_cast<Eigen::Index>(samples.size()), horizon);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (int t = 0; t < horizon; ++t) costs(static_cast<Eigen::Index>(i), t) = samples[i].costs[t];
  }
  return CostToGo(costs);
}

Vector SoftmaxWeights(const Vector& cost_to_go, double eta) {
  if (!(eta > 0.0)) ThrowInvalid("softmax temperature must be > 0");
  if (cost_to_go.size() == 0) ThrowInvalid("softmax over an empty set");
  if (!cost_to_go.allFinite()) ThrowNumeric("softmax over non-finite costs");
  const double shift = cost_to_go.minCoeff();
  Vector w = (-(cost_to_go.array() - shift) / eta).exp().matrix();
  return w / w.sum();
}

double DualValue(const Vector& cost_to_go, double eta, double epsilon) {
  const double shift = cost_to_go.minCoeff();
  const double mean_exp = (-(cost_to_go.array() - shift) / eta).exp().mean();
  return eta * epsilon + eta * std::log(mean_exp) - shift;
}

double KlToUniform(const Vector& probabilities) {
  const double n = static_cast<double>(probabilities.size());
  double kl = 0.0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    const double p = probabilities[i];
    if (p > 0.0) kl += p * std::log(n * p);
  }
  return kl;
}

double SolveEta(const Vector& cost_to_go, const KlBound& bound,
                const EtaSearch& search) {
  if (cost_to_go.size() < 2) ThrowInvalid("SolveEta needs at least 2 samples");
  if (!cost_to_go.allFinite()) ThrowNumeric("SolveEta: non-finite cost-to-go");
  if (!(search.eta_min > 0.0) || !(search.eta_max > search.eta_min)) {
    ThrowInvalid("SolveEta: invalid eta bracket");
  }
  if (cost_to_go.maxCoeff() == cost_to_go.minCoeff()) return search.eta_max;

  const double eps = bound.epsilon();
  auto g = [&](double log_eta) { return DualValue(cost_to_go, std::exp(log_eta), eps); };

  // The weights depend on costs only through (S - min S) / eta, so the
  // bracket is taken relative to the cost spread.
  const double spread = cost_to_go.maxCoeff() - cost_to_go.minCoeff();
  const double log_min = std::log(search.eta_min * spread);
  const double log_max = std::log(search.eta_max * spread);
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = log_min;
  double hi = log_max;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double ga = g(a);
  double gb = g(b);
  for (int it = 0; it < search.iterations; ++it) {
    if (ga < gb) {
      hi = b;
      b = a;
      gb = ga;
      a = hi - inv_phi * (hi - lo);
      ga = g(a);
    } else {
      lo = a;
      a = b;
      ga = gb;
      b = lo + inv_phi * (hi - lo);
      gb = g(b);
    }
  }
  double log_eta = 0.5 * (lo + hi);
  // Still decreasing at the top of the bracket: the bound is slack there.
  if (g(log_max) <= g(log_eta)) return std::exp(log_max);

  // The dual is flat at its minimum, so golden section only pins log eta to
  // about sqrt(machine epsilon). Polish by bisecting on the sign of the
  // derivative, eps - KL(p_eta || uniform), which is increasing in eta.
  auto slope = [&](double x) {
    return eps - KlToUniform(SoftmaxWeights(cost_to_go, std::exp(x)));
  };
  double left = std::max(log_min, log_eta - 1.0);
  double right = std::min(log_max, log_eta + 1.0);
  if (slope(left) < 0.0 && slope(right) > 0.0) {
    for (int it = 0; it < 100 && right - left > 0.0; ++it) {
      const double mid = 0.5 * (left + right);
      if (mid <= left || mid >= right) break;
      (slope(mid) < 0.0 ? left : right) = mid;
    }
    log_eta = 0.5 * (left + right);
  }
  return std::exp(log_eta);
}

WeightTable ComputeWeights(const CostToGoTable& cost_to_go, const KlBound& bound,
                           const EtaSearch& search) {
  const Matrix& s = cost_to_go.values;
  WeightTable table{Matrix(s.rows(), s.cols()), Vector(s.cols())};
  for (Eigen::Index t = 0; t < s.cols(); ++t) {
    const Vector column = s.col(t);
    const double eta = SolveEta(column, bound, search);
    table.eta[t] = eta;
    table.probabilities.col(t) = SoftmaxWeights(column, eta);
  }
  return table;
}

std::vector<std::vector<Vector>> RealizedFeedforwards(const LinGaussPolicy& policy,
                                                      const SampleSet& samples) {
  const int horizon = ValidateSamples(samples);
  if (horizon > policy.horizon()) ThrowInvalid("samples longer than policy horizon");
  std::vector<std::vector<Vector>> out(horizon);
  for (int t = 0; t < horizon; ++t) {
    out[t].reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const Trajectory& tr = samples[i];
      CheckDim(tr.states[t].size(), policy.state_dim(), "sample state");
      CheckDim(tr.actions[t].size(), policy.action_dim(), "sample action");
      Vector k = tr.actions[t] - policy.gains()[t] * tr.states[t];
      if (!k.allFinite()) {
        ThrowNumeric("non-finite realized feedforward in sample " + std::to_string(i) +
                     " at timestep " + std::to_string(t));
      }
      out[t].push_back(std::move(k));
    }
  }
  return out;
}

Pi2Result Pi2Update(const LinGaussPolicy& policy, const SampleSet& samples,
                    const KlBound& bound, const std::optional<KlPenalty>& penalty,
                    double covariance_floor, const EtaSearch& search) {
  const int horizon = ValidateSamples(samples);
  const auto n = static_cast<Eigen::Index>(samples.size());
  if (n < 2) ThrowInvalid("PI2 update needs at least 2 samples");
  if (horizon != policy.horizon()) ThrowInvalid("PI2 update: sample horizon != policy horizon");

  Matrix costs(n, horizon);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Trajectory& tr = samples[static_cast<std::size_t>(i)];
    for (int t = 0; t < horizon; ++t) {
      double c = tr.costs[t];
      if (penalty && penalty->weight != 0.0) {
        if (penalty->reference == nullptr) ThrowInvalid("KL penalty without reference policy");
        c += penalty->weight * PolicyStepKl(policy, *penalty->reference, t, tr.states[t]);
      }
      costs(i, t) = c;
    }
  }
  CostToGoTable s = CostToGo(costs);
  WeightTable w = ComputeWeights(s, bound, search);
  LinGaussPolicy updated = Pi2Refit(policy, samples, w.probabilities, covariance_floor);
  return Pi2Result{std::move(updated), std::move(w), std::move(s)};
}

LinGaussPolicy Pi2Refit(const LinGaussPolicy& policy, const SampleSet& samples,
                        const Matrix& probabilities, double covariance_floor) {
  const int horizon = ValidateSamples(samples);
  const auto n = static_cast<Eigen::Index>(samples.size());
  if (horizon != policy.horizon()) ThrowInvalid("PI2 refit: sample horizon != policy horizon");
  if (probabilities.rows() != n || probabilities.cols() != horizon) {
    ThrowInvalid("PI2 refit: probabilities must be N x T");
  }
  const auto feedforwards = RealizedFeedforwards(policy, samples);
  const int du = policy.action_dim();
  std::vector<Vector> offsets(horizon);
  std::vector<Matrix> covariances(horizon);
  for (int t = 0; t < horizon; ++t) {
    Vector mean = Vector::Zero(du);
    for (Eigen::Index i = 0; i < n; ++i) mean += probabilities(i, t) * feedforwards[t][i];
    Matrix cov = Matrix::Zero(du, du);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vector d = feedforwards[t][i] - mean;
      cov += probabilities(i, t) * d * d.transpose();
    }
    offsets[t] = std::move(mean);
    covariances[t] = FloorCovariance(cov, covariance_floor);
  }
  return LinGaussPolicy(policy.gains(), std::move(offsets), std::move(covariances));
}

}  // namespace pigps
