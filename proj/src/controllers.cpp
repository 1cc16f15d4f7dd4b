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

#include "controllers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pigps {

LinGaussPolicy::LinGaussPolicy(std::vector<Matrix> gains,
                               std::vector<Vector> offsets,
                               std::vector<Matrix> covariances)
    : gains_(std::move(gains)),
      offsets_(std::move(offsets)),
      covariances_(std::move(covariances)) {
  if (gains_.empty()) ThrowInvalid("LinGaussPolicy: horizon must be >= 1");
  const auto horizon = gains_.size();
  if (offsets_.size() != horizon || covariances_.size() != horizon) {
    ThrowInvalid("LinGaussPolicy: K, k and C must all have T entries");
  }
  const Eigen::Index du = gains_[0].rows();
  const Eigen::Index dx = gains_[0].cols();
  if (du == 0 || dx == 0) ThrowInvalid("LinGaussPolicy: empty gain matrix");
  factors_.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    const std::string at = " at t=" + std::to_string(t);
    CheckDim(gains_[t].rows(), du, ("LinGaussPolicy K rows" + at).c_str());
    CheckDim(gains_[t].cols(), dx, ("LinGaussPolicy K cols" + at).c_str());
    CheckDim(offsets_[t].size(), du, ("LinGaussPolicy k" + at).c_str());
    CheckDim(covariances_[t].rows(), du, ("LinGaussPolicy C rows" + at).c_str());
    CheckDim(covariances_[t].cols(), du, ("LinGaussPolicy C cols" + at).c_str());
    const Matrix& c = covariances_[t];
    if (!c.allFinite() || !gains_[t].allFinite() || !offsets_[t].allFinite()) {
      ThrowNumeric("LinGaussPolicy: non-finite parameter" + at);
    }
    if ((c - c.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * std::max(1.0, c.cwiseAbs().maxCoeff())) {
      ThrowInvalid("LinGaussPolicy: covariance not symmetric" + at);
    }
    if (c.isZero(0.0)) {
      factors_.push_back(Matrix::Zero(du, du));
    } else {
      factors_.push_back(CholeskyFactor(c, ("LinGaussPolicy C" + at).c_str()));
    }
  }
}

Vector LinGaussPolicy::Mean(int t, const Vector& x) const {
  if (t < 0 || t >= horizon()) {
    ThrowInvalid("LinGaussPolicy: timestep " + std::to_string(t) +
                 " outside [0, " + std::to_string(horizon()) + ")");
  }
  CheckDim(x.size(), state_dim(), "LinGaussPolicy state");
  return gains_[t] * x + offsets_[t];
}

int ValidateSamples(const SampleSet& samples) {
  if (samples.empty()) ThrowInvalid("empty sample set");
  const int horizon = samples.front().horizon();
  if (horizon < 1) ThrowInvalid("sample trajectories must have T >= 1");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Trajectory& tr = samples[i];
    if (tr.horizon() != horizon || static_cast<int>(tr.states.size()) != horizon + 1 ||
        static_cast<int>(tr.noise.size()) != horizon ||
        static_cast<int>(tr.costs.size()) != horizon) {
      ThrowInvalid("sample " + std::to_string(i) +
                   ": inconsistent trajectory lengths for horizon " +
                   std::to_string(horizon));
    }
  }
  return horizon;
}

Matrix FloorCovariance(const Matrix& covariance, double floor) {
  const Matrix sym = 0.5 * (covariance + covariance.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) ThrowNumeric("covariance eigendecomposition failed");
  if (eig.eigenvalues().minCoeff() >= floor) return sym;
  const Vector clamped = eig.eigenvalues().cwiseMax(floor);
  Matrix out = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

Matrix CholeskyFactor(const Matrix& covariance, const char* what) {
  Eigen::LLT<Matrix> llt(covariance);
  if (llt.info() != Eigen::Success) {
    ThrowNumeric(std::string(what) + ": covariance is not positive definite");
  }
  Matrix factor = llt.matrixL();
  return factor;
}

ActionDraw SampleAction(const StochasticPolicy& policy, int t, const Vector& x,
                        Rng& rng) {
  ActionDraw draw;
  draw.noise = rng.NormalVector(policy.action_dim());
  draw.action = policy.Mean(t, x) + policy.CovarianceFactor(t) * draw.noise;
  return draw;
}

Vector SampleAction(const StochasticPolicy& policy, int t, const Vector& x,
                    uint64_t seed) {
  Rng rng(seed);
  return SampleAction(policy, t, x, rng).action;
}

double GaussianKl(const Vector& mean_p, const Matrix& factor_p,
                  const Vector& mean_q, const Matrix& factor_q) {
  const Eigen::Index d = mean_p.size();
  CheckDim(mean_q.size(), d, "GaussianKl mean");
  CheckDim(factor_p.rows(), d, "GaussianKl factor_p");
  CheckDim(factor_q.rows(), d, "GaussianKl factor_q");
  const Vector diag_p = factor_p.diagonal();
  const Vector diag_q = factor_q.diagonal();
  if ((diag_p.array() <= 0.0).any() || (diag_q.array() <= 0.0).any()) {
    ThrowNumeric("GaussianKl: covariance is not positive definite");
  }
  const auto lq = factor_q.triangularView<Eigen::Lower>();
  const Matrix whitened = lq.solve(factor_p);
  const Vector diff = lq.solve(mean_q - mean_p);
  const double log_det_ratio =
      2.0 * (diag_q.array().log().sum() - diag_p.array().log().sum());
  const double kl = 0.5 * (whitened.squaredNorm() + diff.squaredNorm() -
                           static_cast<double>(d) + log_det_ratio);
  return std::max(0.0, kl);
}

double PolicyStepKl(const StochasticPolicy& p, const StochasticPolicy& q, int t,
                    const Vector& x) {
  CheckDim(q.action_dim(), p.action_dim(), "PolicyStepKl action dim");
  CheckDim(q.state_dim(), p.state_dim(), "PolicyStepKl state dim");
  return GaussianKl(p.Mean(t, x), p.CovarianceFactor(t), q.Mean(t, x),
                    q.CovarianceFactor(t));
}

double TrajectoryKl(const StochasticPolicy& p, const StochasticPolicy& q,
                    const SampleSet& samples) {
  const int horizon = ValidateSamples(samples);
  if (horizon > p.horizon() || horizon > q.horizon()) {
    ThrowInvalid("TrajectoryKl: samples longer than policy horizon");
  }
  double total = 0.0;
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  for (int t = 0; t < horizon; ++t) {
    double step = 0.0;
    for (const Trajectory& tr : samples) step += PolicyStepKl(p, q, t, tr.states[t]);
    total += step * inv_n;
  }
  return total;
}

}  // namespace pigps
