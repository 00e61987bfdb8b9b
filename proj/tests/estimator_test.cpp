// Copyright 2026 The pmids Authors. All rights reserved.
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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "test_util.hpp"

namespace pmids {
namespace {

using testing::column;
using testing::Rng;

Vector e(Index d, Index i) { return Vector::Unit(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)); }

TEST(Estimator, InitialState) {
  for (Index d : {1u, 2u, 25u}) {
    const EstimatorState s(d);
    EXPECT_TRUE(s.gram().isApprox(Matrix::Identity(d, d)));
    EXPECT_TRUE(s.theta_hat().isZero(0.0));
    EXPECT_EQ(s.rounds(), 0u);
    EXPECT_EQ(s.logdet(), 0.0);
  }
  EXPECT_THROW(EstimatorState(0), InvalidArgument);
}

TEST(Estimator, SingleUpdateMatchesClosedFormInverse) {
  EstimatorState s(2);
  s.update(column(e(2, 0)), Vector::Ones(1));
  Matrix v(2, 2);
  v << 2, 0, 0, 1;
  EXPECT_TRUE(s.gram().isApprox(v));
  // 2x2 inverse: [d -b; -c a] / (ad - bc).
  const double det = v(0, 0) * v(1, 1) - v(0, 1) * v(1, 0);
  Matrix inv(2, 2);
  inv << v(1, 1), -v(0, 1), -v(1, 0), v(0, 0);
  inv /= det;
  const Vector expected = inv * s.b();
  EXPECT_NEAR(s.theta_hat()(0), 0.5, 1e-12);
  EXPECT_NEAR(s.theta_hat()(1), 0.0, 1e-12);
  EXPECT_TRUE(s.theta_hat().isApprox(expected, 1e-12));
}

TEST(Estimator, RepeatedUpdate) {
  EstimatorState s(2);
  s.update(column(e(2, 0)), Vector::Ones(1));
  s.update(column(e(2, 0)), Vector::Ones(1));
  EXPECT_NEAR(s.theta_hat()(0), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(s.theta_hat()(1), 0.0, 1e-12);
}

TEST(Estimator, ZeroOperatorOnlyAdvancesTime) {
  EstimatorState s(2);
  s.update(column(e(2, 1)), Vector::Constant(1, 0.3));
  const Matrix v = s.gram();
  const Vector th = s.theta_hat();
  s.update(Matrix::Zero(2, 3), Vector::Constant(3, 5.0));
  EXPECT_EQ(s.rounds(), 2u);
  EXPECT_EQ(s.gram(), v);
  EXPECT_EQ(s.theta_hat(), th);
}

TEST(Estimator, DimensionErrors) {
  EstimatorState s(2);
  EXPECT_THROW(s.update(Matrix::Zero(3, 1), Vector::Zero(1)), InvalidArgument);
  EXPECT_THROW(s.update(Matrix::Zero(2, 2), Vector::Zero(1)), InvalidArgument);
  EXPECT_THROW(s.weighted_norm(Vector::Zero(3)), InvalidArgument);
}

TEST(Estimator, BetaRadius) {
  EstimatorState s(2);
  EXPECT_DOUBLE_EQ(s.beta_radius(1.0), 1.0);
  EXPECT_NEAR(s.beta_radius(std::exp(-1.0)), std::sqrt(2.0) + 1.0, 1e-12);
  s.update(column(e(2, 0)), Vector::Zero(1));
  EXPECT_NEAR(s.beta_radius(1.0), std::sqrt(std::log(2.0)) + 1.0, 1e-12);
  EXPECT_NEAR(s.beta_radius(1.0), 1.83255, 1e-5);
  EXPECT_THROW(s.beta_radius(0.0), InvalidArgument);
  EXPECT_THROW(s.beta_radius(1.5), InvalidArgument);
}

TEST(Estimator, WeightedNorm) {
  EstimatorState s(2);
  EXPECT_DOUBLE_EQ(s.weighted_norm(e(2, 0)), 1.0);
  EXPECT_DOUBLE_EQ(s.weighted_norm(Vector::Zero(2)), 0.0);
  Matrix a = Matrix::Zero(2, 1);
  a(0, 0) = std::sqrt(3.0);
  s.update(a, Vector::Zero(1));
  EXPECT_NEAR(s.weighted_norm(e(2, 0)), 0.5, 1e-12);
}

TEST(Estimator, TotalInfoGain) {
  EstimatorState s(2);
  EXPECT_EQ(s.total_info_gain(), 0.0);
  s.update(column(e(2, 0)), Vector::Zero(1));
  EXPECT_NEAR(s.total_info_gain(), std::log(2.0), 1e-12);
}

TEST(Estimator, InfoGainBoundForUnitBandit) {
  // d = 2, m = 1, t = 10: gamma <= d log(1 + t m / d) = 2 log 6.
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    EstimatorState s(2);
    for (int t = 0; t < 10; ++t) s.update(column(testing::random_in_ball(2, rng, 1.0)), Vector::Zero(1));
    EXPECT_LE(s.total_info_gain(), 2.0 * std::log(6.0) + 1e-12);
  }
  EstimatorState worst(2);
  for (int t = 0; t < 10; ++t) worst.update(column(e(2, t % 2)), Vector::Zero(1));
  EXPECT_NEAR(worst.total_info_gain(), 2.0 * std::log(6.0), 1e-12);
}

TEST(EstimatorProperty, RecomputedQuantitiesAgree) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Game g = testing::random_game(3, 5, rng);
    const EstimatorState s = testing::random_state(g, 20, rng);
    EXPECT_NEAR(s.logdet(), std::log(s.gram().determinant()), 1e-8);
    EXPECT_LE((s.gram() * s.theta_hat() - s.b()).norm(), 1e-9);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(s.gram());
    EXPECT_GE(es.eigenvalues().minCoeff(), 1.0 - 1e-9);
  }
}

TEST(EstimatorProperty, LogdetMonotoneAndTelescoping) {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const Game g = testing::random_game(4, 6, rng);
    EstimatorState s(g.dim());
    std::uniform_int_distribution<Index> pick(0, g.size() - 1);
    double sum = 0.0;
    for (int t = 0; t < 30; ++t) {
      const Matrix& a = g.op(pick(rng));
      const Matrix m = a.transpose() * s.gram_inverse() * a;
      sum += std::log((Matrix::Identity(m.rows(), m.cols()) + m).determinant());
      const double before = s.logdet();
      s.update(a, testing::random_vector(static_cast<Index>(a.cols()), rng));
      EXPECT_GE(s.logdet(), before - 1e-12);
    }
    EXPECT_NEAR(s.total_info_gain(), sum, 1e-6);
  }
}

TEST(EstimatorProperty, PermutationInvariance) {
  Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::pair<Matrix, Vector>> batch;
    for (int k = 0; k < 12; ++k) {
      Matrix a(3, 2);
      a.col(0) = testing::random_in_ball(3, rng, 0.7);
      a.col(1) = testing::random_in_ball(3, rng, 0.7);
      batch.emplace_back(a, testing::random_vector(2, rng));
    }
    EstimatorState s1(3), s2(3);
    for (const auto& [a, o] : batch) s1.update(a, o);
    std::shuffle(batch.begin(), batch.end(), rng);
    for (const auto& [a, o] : batch) s2.update(a, o);
    EXPECT_LE((s1.gram() - s2.gram()).norm(), 1e-9);
    EXPECT_LE((s1.theta_hat() - s2.theta_hat()).norm(), 1e-9);
  }
}

TEST(EstimatorProperty, ConfidenceCoverage) {
  // Unit-variance noise, delta = 0.1, horizon 100, 500 episodes.
  Rng rng(14);
  const Index d = 3;
  const int episodes = 500;
  int covered = 0;
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int ep = 0; ep < episodes; ++ep) {
    const Vector theta = testing::random_in_ball(d, rng, 1.0);
    EstimatorState s(d);
    bool ok = true;
    for (int t = 0; t < 100 && ok; ++t) {
      const Vector x = testing::random_in_ball(d, rng, 1.0);
      s.update(column(x), Vector::Constant(1, x.dot(theta) + noise(rng)));
      const Vector err = s.theta_hat() - theta;
      ok = std::sqrt(err.dot(s.gram() * err)) <= s.beta_radius(0.1);
    }
    covered += ok ? 1 : 0;
  }
  EXPECT_GE(covered, static_cast<int>(0.85 * episodes));
}

}  // namespace
}  // namespace pmids
