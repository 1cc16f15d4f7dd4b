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

#include "lqr_baseline.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace pigps {

namespace {

Matrix Symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

LinearDynamics FitDynamics(const SampleSet& samples, const DynamicsFitOptions& options,
                           const LinearDynamics* prior, double action_limit) {
  const int horizon = ValidateSamples(samples);
  const auto n = static_cast<Eigen::Index>(samples.size());
  if (n < 2) ThrowInvalid("FitDynamics needs at least 2 samples");
  if (options.ridge < 0 || options.prior_strength < 0) {
    ThrowInvalid("FitDynamics: ridge and prior strength must be >= 0");
  }
  const Eigen::Index dx = samples[0].states[0].size();
  const Eigen::Index du = samples[0].actions[0].size();
  const Eigen::Index dz = dx + du + 1;
  const bool use_prior = prior != nullptr && options.prior_strength > 0.0;
  if (use_prior && prior->horizon() != horizon) {
    ThrowInvalid("FitDynamics: prior horizon mismatch");
  }

  LinearDynamics dyn;
  for (int t = 0; t < horizon; ++t) {
    Matrix z(dz, n);
    Matrix y(dx, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Trajectory& tr = samples[static_cast<std::size_t>(i)];
      CheckDim(tr.states[t].size(), dx, "FitDynamics state");
      CheckDim(tr.actions[t].size(), du, "FitDynamics action");
      z.col(i).head(dx) = tr.states[t];
      z.col(i).segment(dx, du) = tr.actions[t].cwiseMax(-action_limit).cwiseMin(action_limit);
      z(dz - 1, i) = 1.0;
      y.col(i) = tr.states[t + 1];
    }
    Matrix gram = z * z.transpose();
    Matrix rhs = y * z.transpose();  // dx x dz
    gram.diagonal().array() += options.ridge;
    if (use_prior) {
      Matrix w_prior(dx, dz);
      w_prior << prior->A[t], prior->B[t], prior->c[t];
      gram.diagonal().array() += options.prior_strength;
      rhs += options.prior_strength * w_prior;
    }
    Eigen::LDLT<Matrix> ldlt(gram);
    const double scale = std::max(1.0, gram.diagonal().cwiseAbs().maxCoeff());
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().cwiseAbs().minCoeff() <= 1e-12 * scale) {
      ThrowNumeric("FitDynamics: regressors rank-deficient at timestep " + std::to_string(t) +
                   "; increase ridge or prior strength");
    }
    const Matrix w = ldlt.solve(rhs.transpose()).transpose();
    dyn.A.push_back(w.leftCols(dx));
    dyn.B.push_back(w.middleCols(dx, du));
    dyn.c.push_back(w.col(dz - 1));
    const Matrix residual = y - w * z;
    dyn.noise.push_back(Symmetrize(residual * residual.transpose() / static_cast<double>(n)));
  }

  Vector mean = Vector::Zero(dx);
  for (const Trajectory& tr : samples) mean += tr.states[0];
  mean /= static_cast<double>(n);
  Matrix cov = Matrix::Zero(dx, dx);
  for (const Trajectory& tr : samples) {
    const Vector d = tr.states[0] - mean;
    cov += d * d.transpose();
  }
  dyn.initial_mean = mean;
  dyn.initial_cov = Symmetrize(cov / static_cast<double>(n));
  return dyn;
}

QuadraticCostExpansion ExpandCost(const Environment& env, const SampleSet& samples,
                                  double step, double uu_floor) {
  const int horizon = ValidateSamples(samples);
  const int dx = env.state_dim();
  const int du = env.action_dim();
  const int dz = dx + du;
  const double inv_n = 1.0 / static_cast<double>(samples.size());

  QuadraticCostExpansion out;
  for (int t = 0; t < horizon; ++t) {
    Vector zbar = Vector::Zero(dz);
    for (const Trajectory& tr : samples) {
      zbar.head(dx) += tr.states[t];
      zbar.tail(du) += tr.actions[t];
    }
    zbar *= inv_n;
    auto l = [&](const Vector& z) { return env.Cost(z.head(dx), z.tail(du), t); };

    const double f0 = l(zbar);
    Vector grad(dz);
    Matrix hess(dz, dz);
    for (int a = 0; a < dz; ++a) {
      Vector zp = zbar, zm = zbar;
      zp[a] += step;
      zm[a] -= step;
      const double fp = l(zp), fm = l(zm);
      grad[a] = (fp - fm) / (2.0 * step);
      hess(a, a) = (fp - 2.0 * f0 + fm) / (step * step);
      for (int b = 0; b < a; ++b) {
        Vector zpp = zbar, zpm = zbar, zmp = zbar, zmm = zbar;
        zpp[a] += step; zpp[b] += step;
        zpm[a] += step; zpm[b] -= step;
        zmp[a] -= step; zmp[b] += step;
        zmm[a] -= step; zmm[b] -= step;
        const double h = (l(zpp) - l(zpm) - l(zmp) + l(zmm)) / (4.0 * step * step);
        hess(a, b) = h;
        hess(b, a) = h;
      }
    }
    Matrix luu = Symmetrize(hess.bottomRightCorner(du, du));
    luu = FloorCovariance(luu, uu_floor);
    hess.bottomRightCorner(du, du) = luu;
    // Re-center: gradient at the origin of the quadratic model.
    const Vector g_abs = grad - hess * zbar;

    out.lxx.push_back(Symmetrize(hess.topLeftCorner(dx, dx)));
    out.luu.push_back(luu);
    out.lux.push_back(hess.bottomLeftCorner(du, dx));
    out.lx.push_back(g_abs.head(dx));
    out.lu.push_back(g_abs.tail(du));
  }
  return out;
}

LinGaussPolicy LqrBackwardPass(const LinearDynamics& dynamics,
                               const QuadraticCostExpansion& cost,
                               const LinGaussPolicy& prev, double eta,
                               double covariance_floor) {
  const int horizon = prev.horizon();
  if (dynamics.horizon() != horizon || cost.horizon() != horizon) {
    ThrowInvalid("LqrBackwardPass: horizon mismatch between dynamics, cost and policy");
  }
  if (!(eta > 0.0)) ThrowInvalid("LqrBackwardPass: eta must be > 0");
  const int dx = prev.state_dim();
  const int du = prev.action_dim();
  CheckDim(dynamics.A[0].rows(), dx, "dynamics A");
  CheckDim(dynamics.B[0].cols(), du, "dynamics B");
  const double inv_eta = 1.0 / eta;

  std::vector<Matrix> gains(horizon);
  std::vector<Vector> offsets(horizon);
  std::vector<Matrix> covs(horizon);
  Matrix vxx = Matrix::Zero(dx, dx);
  Vector vx = Vector::Zero(dx);
  for (int t = horizon - 1; t >= 0; --t) {
    const Matrix& a = dynamics.A[t];
    const Matrix& b = dynamics.B[t];
    const Vector& c = dynamics.c[t];
    const Matrix& kp = prev.gains()[t];
    const Vector& offp = prev.offsets()[t];
    const Matrix prec = Eigen::LLT<Matrix>(prev.Covariance(t)).solve(Matrix::Identity(du, du));

    const Vector next_grad = vxx * c + vx;
    const Matrix qxx = inv_eta * cost.lxx[t] + kp.transpose() * prec * kp + a.transpose() * vxx * a;
    Matrix quu = inv_eta * cost.luu[t] + prec + b.transpose() * vxx * b;
    const Matrix qux = inv_eta * cost.lux[t] - prec * kp + b.transpose() * vxx * a;
    const Vector qx = inv_eta * cost.lx[t] + kp.transpose() * prec * offp + a.transpose() * next_grad;
    const Vector qu = inv_eta * cost.lu[t] - prec * offp + b.transpose() * next_grad;
    quu = Symmetrize(quu);

    Eigen::LLT<Matrix> llt(quu);
    if (llt.info() != Eigen::Success) {
      ThrowNumeric("LqrBackwardPass: action Hessian not positive definite at t=" + std::to_string(t));
    }
    gains[t] = -llt.solve(qux);
    offsets[t] = -llt.solve(qu);
    covs[t] = FloorCovariance(llt.solve(Matrix::Identity(du, du)), covariance_floor);

    vxx = Symmetrize(qxx + qux.transpose() * gains[t]);
    vx = qx + qux.transpose() * offsets[t];
  }
  return LinGaussPolicy(std::move(gains), std::move(offsets), std::move(covs));
}

double ExpectedTrajectoryKl(const LinearDynamics& dynamics, const LinGaussPolicy& next,
                            const LinGaussPolicy& prev) {
  const int horizon = next.horizon();
  if (prev.horizon() != horizon || dynamics.horizon() != horizon) {
    ThrowInvalid("ExpectedTrajectoryKl: horizon mismatch");
  }
  Vector mu = dynamics.initial_mean;
  Matrix sigma = dynamics.initial_cov;
  double total = 0.0;
  for (int t = 0; t < horizon; ++t) {
    const Matrix& kn = next.gains()[t];
    const Matrix& kp = prev.gains()[t];
    const Matrix& lp = prev.CovarianceFactor(t);
    // KL at the mean state plus the quadratic term from state spread.
    const double kl_mean = GaussianKl(next.Mean(t, mu), next.CovarianceFactor(t),
                                      prev.Mean(t, mu), lp);
    const Matrix dk = lp.triangularView<Eigen::Lower>().solve(kn - kp);
    total += kl_mean + 0.5 * (dk * sigma * dk.transpose()).trace();

    const Matrix& a = dynamics.A[t];
    const Matrix& b = dynamics.B[t];
    const Matrix closed = a + b * kn;
    mu = a * mu + b * next.Mean(t, mu) + dynamics.c[t];
    sigma = closed * sigma * closed.transpose() +
            b * next.Covariance(t) * b.transpose() + dynamics.noise[t];
    sigma = Symmetrize(sigma);
  }
  return total;
}

LqrResult LqrBackwardKl(const LinearDynamics& dynamics, const QuadraticCostExpansion& cost,
                        const LinGaussPolicy& prev, const KlBound& bound,
                        const LqrOptions& options) {
  const double target = bound.epsilon() * prev.horizon();
  const double lower = 0.9 * target;
  const double upper = 1.1 * target;

  auto solve = [&](double eta) {
    LinGaussPolicy policy = LqrBackwardPass(dynamics, cost, prev, eta, options.covariance_floor);
    const double kl = ExpectedTrajectoryKl(dynamics, policy, prev);
    return LqrResult{std::move(policy), eta, kl};
  };

  LqrResult at_min = solve(options.eta_min);
  if (at_min.kl <= upper) return at_min;
  LqrResult at_max = solve(options.eta_max);
  if (at_max.kl > upper) {
    std::ostringstream msg;
    msg << "LqrBackwardKl: cannot bracket KL target " << target << "; achievable range ["
        << at_max.kl << ", " << at_min.kl << "] over eta in [" << options.eta_min << ", "
        << options.eta_max << "]";
    ThrowNumeric(msg.str());
  }
  if (at_max.kl >= lower) return at_max;

  double lo = std::log(options.eta_min);  // KL too large here
  double hi = std::log(options.eta_max);  // KL too small here
  for (int it = 0; it < options.max_bisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    LqrResult r = solve(std::exp(mid));
    if (r.kl > upper) {
      lo = mid;
    } else if (r.kl < lower) {
      hi = mid;
    } else {
      return r;
    }
  }
  ThrowNumeric("LqrBackwardKl: bisection did not converge");
}

}  // namespace pigps
