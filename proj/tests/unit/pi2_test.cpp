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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "envs.hpp"
#include "rng.hpp"
#include "test_support.hpp"

namespace pigps {
namespace {

using testing::RandomLinGauss;
using testing::RandomSamples;

Vector Vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

// Samples with K = 0 and x = 0, so realized feedforwards equal the actions.
SampleSet FeedforwardSamples(const std::vector<Vector>& actions, const std::vector<double>& costs) {
  SampleSet samples;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    Trajectory tr;
    tr.states = {Vector::Zero(1), Vector::Zero(1)};
    tr.actions = {actions[i]};
    tr.noise = {Vector::Zero(actions[i].size())};
    tr.costs = {costs[i]};
    samples.push_back(tr);
  }
  return samples;
}

LinGaussPolicy ZeroGainPolicy(int du) {
  return LinGaussPolicy({Matrix::Zero(du, 1)}, {Vector::Zero(du)}, {Matrix::Identity(du, du)});
}

TEST(CostToGoTest, UnitCosts) {
  const CostToGoTable s = CostToGo(Matrix::Ones(2, 3));
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(s.values(i, 0), 3.0);
    EXPECT_EQ(s.values(i, 1), 2.0);
    EXPECT_EQ(s.values(i, 2), 1.0);
  }
}

TEST(CostToGoTest, ZeroCosts) {
  EXPECT_TRUE(CostToGo(Matrix::Zero(3, 4)).values.isZero(0.0));
}

TEST(CostToGoTest, MatchesReverseCumulativeSum) {
  std::mt19937_64 gen(3);
  const Matrix costs = testing::RandomMatrix(gen, 5, 4);
  const CostToGoTable s = CostToGo(costs);
  for (int i = 0; i < 5; ++i) {
    double acc = 0.0;
    for (int t = 3; t >= 0; --t) {
      acc = costs(i, t) + acc;
      EXPECT_EQ(s.values(i, t), acc);
    }
  }
}

TEST(CostToGoTest, FirstColumnIsTrajectoryCost) {
  std::mt19937_64 gen(4);
  const SampleSet samples = RandomSamples(gen, 4, 6, 2, 1);
  const CostToGoTable s = CostToGo(samples);
  for (int i = 0; i < 4; ++i) {
    double total = 0.0;
    for (double c : samples[i].costs) total += c;
    EXPECT_NEAR(s.values(i, 0), total, 1e-12);
    for (int t = 0; t + 1 < 6; ++t) {
      EXPECT_NEAR(s.values(i, t), s.values(i, t + 1) + samples[i].costs[t], 1e-12);
    }
  }
}

TEST(CostToGoTest, NonFiniteCostNamesSampleAndStep) {
  Matrix costs = Matrix::Zero(3, 4);
  costs(2, 1) = std::nan("");
  try {
    CostToGo(costs);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumeric);
    EXPECT_NE(std::string(e.what()).find("sample 2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("timestep 1"), std::string::npos);
  }
}

TEST(CostToGoTest, RejectsSingleSample) {
  EXPECT_THROW(CostToGo(Matrix::Zero(1, 3)), Error);
}

TEST(SoftmaxTest, EqualCostsUniform) {
  const Vector w = SoftmaxWeights(Vector::Constant(4, 2.5), 0.3);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(w[i], 0.25);
}

TEST(SoftmaxTest, TwoPointValue) {
  const Vector w = SoftmaxWeights(Vec({0.0, 1.0}), 1.0);
  const double e = std::exp(-1.0);
  EXPECT_NEAR(w[0], 1.0 / (1.0 + e), 1e-15);
  EXPECT_NEAR(w[1], e / (1.0 + e), 1e-15);
  EXPECT_NEAR(w[0], 0.7311, 1e-4);
}

TEST(SoftmaxTest, HighTemperatureUniform) {
  const Vector w = SoftmaxWeights(Vec({0.0, 3.0, 7.0}), 1e9);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(w[i], 1.0 / 3.0, 1e-6);
}

TEST(SoftmaxTest, ShiftInvariant) {
  const Vector s = Vec({1.0, 4.0, 2.0, 9.0});
  const Vector a = SoftmaxWeights(s, 0.7);
  const Vector b = SoftmaxWeights((s.array() + 1e4).matrix(), 0.7);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SoftmaxTest, LargeCostsStayFinite) {
  const Vector w = SoftmaxWeights(Vec({1e6, 1e6 + 1.0}), 1e-3);
  EXPECT_TRUE(w.allFinite());
  EXPECT_NEAR(w.sum(), 1.0, 1e-15);
}

TEST(SoftmaxTest, RejectsNonPositiveTemperature) {
  EXPECT_THROW(SoftmaxWeights(Vec({0.0, 1.0}), 0.0), Error);
  EXPECT_THROW(SoftmaxWeights(Vec({0.0, 1.0}), -1.0), Error);
}

TEST(SolveEtaTest, EqualCostsGiveEtaMax) {
  const EtaSearch search;
  const double eta = SolveEta(Vec({0.0, 0.0}), KlBound(0.5));
  EXPECT_EQ(eta, search.eta_max);
  const Vector w = SoftmaxWeights(Vec({0.0, 0.0}), eta);
  EXPECT_DOUBLE_EQ(w[0], 0.5);
  EXPECT_DOUBLE_EQ(w[1], 0.5);
}

TEST(SolveEtaTest, MatchesGridSearch) {
  const Vector s = Vec({0.0, 1.0});
  const double epsilon = 0.1;
  const double eta = SolveEta(s, KlBound(epsilon));

  // Independent oracle: the two-point dual written out explicitly.
  auto dual = [&](double e) {
    return e * epsilon + e * std::log(0.5 * (1.0 + std::exp(-1.0 / e)));
  };
  const int points = 1000000;
  const double lo = std::log(1e-4);
  const double hi = std::log(1e6);
  double best_eta = 0.0;
  double best = INFINITY;
  for (int k = 0; k < points; ++k) {
    const double e = std::exp(lo + (hi - lo) * k / (points - 1));
    const double g = dual(e);
    if (g < best) {
      best = g;
      best_eta = e;
    }
  }
  EXPECT_NEAR(eta / best_eta, 1.0, 1e-3);
  EXPECT_NEAR(KlToUniform(SoftmaxWeights(s, eta)), epsilon, 1e-4);
}

TEST(SolveEtaTest, ScaleEquivariant) {
  const Vector s = Vec({0.0, 0.4, 1.3, 2.0, 5.0});
  const KlBound bound(0.3);
  const double eta = SolveEta(s, bound);
  const double eta10 = SolveEta(10.0 * s, bound);
  EXPECT_NEAR(eta10 / eta, 10.0, 1e-6);
  const Vector a = SoftmaxWeights(s, eta);
  const Vector b = SoftmaxWeights(10.0 * s, eta10);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(SolveEtaTest, FeasibleAndActiveOnRandomColumns) {
  std::mt19937_64 gen(8);
  std::uniform_int_distribution<int> count(2, 50);
  std::uniform_real_distribution<double> eps(0.01, 2.0);
  std::exponential_distribution<double> cost(0.2);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = count(gen);
    const double epsilon = eps(gen);
    Vector s(n);
    for (int i = 0; i < n; ++i) s[i] = cost(gen);
    const double kl = KlToUniform(SoftmaxWeights(s, SolveEta(s, KlBound(epsilon))));
    EXPECT_LE(kl, epsilon + 1e-4);
    if (std::log(static_cast<double>(n)) > epsilon) EXPECT_NEAR(kl, epsilon, 1e-3);
  }
}

TEST(SolveEtaTest, RejectsBadInput) {
  EXPECT_THROW(SolveEta(Vec({1.0}), KlBound(0.1)), Error);
  EXPECT_THROW(SolveEta(Vec({1.0, std::nan("")}), KlBound(0.1)), Error);
  EXPECT_THROW(KlBound(0.0), Error);
  EXPECT_THROW(KlBound(-1.0), Error);
}

TEST(ComputeWeightsTest, ColumnsNormalizedAndMonotone) {
  std::mt19937_64 gen(9);
  const SampleSet samples = RandomSamples(gen, 12, 5, 2, 2);
  const CostToGoTable s = CostToGo(samples);
  const WeightTable w = ComputeWeights(s, KlBound(0.5));
  for (int t = 0; t < 5; ++t) {
    EXPECT_NEAR(w.probabilities.col(t).sum(), 1.0, 1e-9);
    EXPECT_GT(w.eta[t], 0.0);
    EXPECT_GE(w.probabilities.col(t).minCoeff(), 0.0);
    EXPECT_LE(w.probabilities.col(t).maxCoeff(), 1.0);
    for (int i = 0; i < 12; ++i) {
      for (int j = 0; j < 12; ++j) {
        if (s.values(i, t) < s.values(j, t)) {
          EXPECT_GT(w.probabilities(i, t), w.probabilities(j, t));
        }
      }
    }
  }
}

TEST(Pi2UpdateTest, UniformWeightsGiveSampleMoments) {
  const std::vector<Vector> k = {Vec({1.0, 0.0}), Vec({3.0, 2.0}), Vec({2.0, -2.0})};
  const SampleSet samples = FeedforwardSamples(k, {4.0, 4.0, 4.0});
  const Pi2Result r = Pi2Update(ZeroGainPolicy(2), samples, KlBound(0.5));
  EXPECT_LT((r.policy.offsets()[0] - Vec({2.0, 0.0})).norm(), 1e-12);
  Matrix expected(2, 2);
  expected << 2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 8.0 / 3.0;
  EXPECT_LT((r.policy.covariances()[0] - expected).norm(), 1e-12);
}

TEST(Pi2UpdateTest, WinnerTakeAll) {
  const std::vector<Vector> k = {Vec({5.0}), Vec({-1.0})};
  const SampleSet samples = FeedforwardSamples(k, {100.0, 0.0});
  const double floor = 1e-3;
  const Pi2Result r = Pi2Update(ZeroGainPolicy(1), samples, KlBound(50.0), std::nullopt, floor);
  EXPECT_NEAR(r.policy.offsets()[0][0], -1.0, 1e-12);
  EXPECT_NEAR(r.policy.covariances()[0](0, 0), floor, 1e-12);
}

TEST(Pi2RefitTest, HandComputedWeightedMle) {
  // k = (1,0), (0,2), (4,4) with weights (1/2, 1/4, 1/4):
  // mean = (1.5, 1.5); deviations (-0.5,-1.5), (-1.5,0.5), (2.5,2.5).
  const std::vector<Vector> k = {Vec({1.0, 0.0}), Vec({0.0, 2.0}), Vec({4.0, 4.0})};
  const SampleSet samples = FeedforwardSamples(k, {0.0, 0.0, 0.0});
  Matrix p(3, 1);
  p << 0.5, 0.25, 0.25;
  const LinGaussPolicy out = Pi2Refit(ZeroGainPolicy(2), samples, p);
  EXPECT_LT((out.offsets()[0] - Vec({1.5, 1.5})).norm(), 1e-10);
  Matrix expected(2, 2);
  // 0.5*[0.25 0.75; 0.75 2.25] + 0.25*[2.25 -0.75; -0.75 0.25] + 0.25*[6.25 6.25; 6.25 6.25]
  expected << 2.25, 1.75, 1.75, 2.75;
  EXPECT_LT((out.covariances()[0] - expected).norm(), 1e-10);
}

TEST(Pi2UpdateTest, FeedbackGainsKeptAndFeedforwardsRealized) {
  std::mt19937_64 gen(12);
  const LinGaussPolicy policy = RandomLinGauss(gen, 3, 2, 1);
  const SampleSet samples = RandomSamples(gen, 2, 3, 2, 1);
  // Equal per-step costs: uniform weights, so k_new is the mean of u - Kx.
  SampleSet flat = samples;
  for (Trajectory& tr : flat) tr.costs.assign(3, 1.0);
  const Pi2Result r = Pi2Update(policy, flat, KlBound(0.2));
  for (int t = 0; t < 3; ++t) {
    EXPECT_EQ(r.policy.gains()[t], policy.gains()[t]);
    const Vector k0 = flat[0].actions[t] - policy.gains()[t] * flat[0].states[t];
    const Vector k1 = flat[1].actions[t] - policy.gains()[t] * flat[1].states[t];
    EXPECT_LT((r.policy.offsets()[t] - 0.5 * (k0 + k1)).norm(), 1e-12);
  }
}

TEST(Pi2UpdateTest, CostShiftInvariant) {
  std::mt19937_64 gen(13);
  const LinGaussPolicy policy = RandomLinGauss(gen, 4, 3, 2);
  const SampleSet samples = RandomSamples(gen, 8, 4, 3, 2);
  SampleSet shifted = samples;
  for (Trajectory& tr : shifted) {
    for (double& c : tr.costs) c += 17.0;
  }
  const Pi2Result a = Pi2Update(policy, samples, KlBound(0.4));
  const Pi2Result b = Pi2Update(policy, shifted, KlBound(0.4));
  EXPECT_LT((a.weights.probabilities - b.weights.probabilities).cwiseAbs().maxCoeff(), 1e-9);
  for (int t = 0; t < 4; ++t) {
    EXPECT_LT((a.policy.offsets()[t] - b.policy.offsets()[t]).norm(), 1e-9);
    EXPECT_LT((a.policy.covariances()[t] - b.policy.covariances()[t]).norm(), 1e-9);
  }
}

TEST(Pi2UpdateTest, CovarianceFloorHolds) {
  std::mt19937_64 gen(14);
  const LinGaussPolicy policy = RandomLinGauss(gen, 5, 2, 2);
  const SampleSet samples = RandomSamples(gen, 3, 5, 2, 2);
  const double floor = 0.05;
  const Pi2Result r = Pi2Update(policy, samples, KlBound(2.0), std::nullopt, floor);
  for (const Matrix& c : r.policy.covariances()) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(c);
    EXPECT_GE(eig.eigenvalues().minCoeff(), floor * (1.0 - 1e-12));
  }
}

TEST(Pi2UpdateTest, PenaltyEqualsAugmentedCosts) {
  std::mt19937_64 gen(15);
  const LinGaussPolicy policy = RandomLinGauss(gen, 4, 2, 2);
  const LinGaussPolicy reference = RandomLinGauss(gen, 4, 2, 2);
  const SampleSet samples = RandomSamples(gen, 6, 4, 2, 2);
  const double weight = 0.3;
  SampleSet augmented = samples;
  for (Trajectory& tr : augmented) {
    for (int t = 0; t < 4; ++t) tr.costs[t] += weight * PolicyStepKl(policy, reference, t, tr.states[t]);
  }
  const Pi2Result a =
      Pi2Update(policy, samples, KlBound(0.5), KlPenalty{weight, &reference});
  const Pi2Result b = Pi2Update(policy, augmented, KlBound(0.5));
  const Pi2Result plain = Pi2Update(policy, samples, KlBound(0.5));
  EXPECT_LT((a.cost_to_go.values - b.cost_to_go.values).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT((a.cost_to_go.values - plain.cost_to_go.values).cwiseAbs().maxCoeff(), 1e-3);
  for (int t = 0; t < 4; ++t) {
    EXPECT_LT((a.policy.offsets()[t] - b.policy.offsets()[t]).norm(), 1e-12);
  }
}

TEST(Pi2UpdateTest, PenaltyWithoutReferenceThrows) {
  std::mt19937_64 gen(16);
  const LinGaussPolicy policy = RandomLinGauss(gen, 2, 2, 1);
  const SampleSet samples = RandomSamples(gen, 3, 2, 2, 1);
  EXPECT_THROW(Pi2Update(policy, samples, KlBound(0.5), KlPenalty{1.0, nullptr}), Error);
}

TEST(Pi2UpdateTest, RejectsTooFewSamplesAndNonFinite) {
  std::mt19937_64 gen(17);
  const LinGaussPolicy policy = RandomLinGauss(gen, 2, 2, 1);
  EXPECT_THROW(Pi2Update(policy, RandomSamples(gen, 1, 2, 2, 1), KlBound(0.5)), Error);
  SampleSet bad = RandomSamples(gen, 3, 2, 2, 1);
  bad[1].actions[0][0] = INFINITY;
  EXPECT_THROW(Pi2Update(policy, bad, KlBound(0.5)), Error);
}

// One step, state held at zero, cost (u - 2)^2.
class QuadraticTarget final : public Environment {
 public:
  int state_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  int horizon() const override { return 1; }
  Vector InitialState() const override { return Vector::Zero(1); }
  Vector Step(const Vector& x, const Vector&) const override { return x; }
  double Cost(const Vector&, const Vector& u, int) const override {
    return (u[0] - 2.0) * (u[0] - 2.0);
  }
  bool Success(const Vector&) const override { return true; }
  double action_limit() const override { return 1e6; }
};

TEST(Pi2UpdateTest, DecreasesExpectedCostOnQuadratic) {
  const QuadraticTarget env;
  const LinGaussPolicy policy = ZeroGainPolicy(1);
  Rng rng(99);
  SampleSet samples;
  for (int i = 0; i < 1000; ++i) samples.push_back(Rollout(env, policy, rng));
  const Pi2Result r = Pi2Update(policy, samples, KlBound(0.5));
  auto expected_cost = [](const LinGaussPolicy& p) {
    const double k = p.offsets()[0][0];
    return (k - 2.0) * (k - 2.0) + p.covariances()[0](0, 0);
  };
  EXPECT_LT(expected_cost(r.policy), expected_cost(policy));
}

}  // namespace
}  // namespace pigps
