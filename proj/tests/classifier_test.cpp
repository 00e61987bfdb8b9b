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

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Vector s1(double a) { return Vector::Constant(1, a); }

Game make(const std::vector<Vector>& xs, const std::vector<Matrix>& ops) {
  return Game(xs, ops, NoiseModel::gaussian(1.0), "test");
}

Game bandit(const std::vector<Vector>& xs) {
  std::vector<Matrix> ops;
  for (const auto& x : xs) ops.push_back(column(x));
  return make(xs, ops);
}

Game zero_ops(const std::vector<Vector>& xs) {
  std::vector<Matrix> ops(xs.size(), Matrix::Zero(xs.front().size(), 1));
  return make(xs, ops);
}

// d = 1: +-1/2 uninformative, 0 observes theta with weight 1/2.
Game observer_game() {
  return make({s1(0.5), s1(-0.5), s1(0.0)},
              {Matrix::Zero(1, 1), Matrix::Zero(1, 1), Matrix::Constant(1, 1, 0.5)});
}

TEST(Pareto, Examples) {
  EXPECT_EQ(pareto_actions(bandit({v2(0.5, 0)})), std::vector<Index>{0});
  const Vector e1 = v2(0.5, 0), e2 = v2(0, 0.5), origin = v2(0, 0);
  // 0.4 e1 + 0.4 e2 + 0.2 * 0 reproduces the fourth point.
  const Vector inner = v2(0.2, 0.2);
  EXPECT_LE((0.4 * e1 + 0.4 * e2 + 0.2 * origin - inner).norm(), 1e-15);
  EXPECT_EQ(pareto_actions(bandit({e1, e2, origin, inner})), (std::vector<Index>{0, 1, 2}));
  // Midpoint of the segment: on the boundary, not extreme.
  EXPECT_EQ(pareto_actions(bandit({e1, e2, v2(0.25, 0.25)})), (std::vector<Index>{0, 1}));
  // Without the origin the same point is a vertex of the triangle.
  EXPECT_EQ(pareto_actions(bandit({e1, e2, inner})), (std::vector<Index>{0, 1, 2}));
}

TEST(Pareto, DuplicatesKeepLowestIndex) {
  const Game g = bandit({v2(0.5, 0), v2(0, 0.5), v2(0.5, 0)});
  EXPECT_EQ(pareto_actions(g), (std::vector<Index>{0, 1}));
}

TEST(Neighbors, OneDimensional) {
  const Game g = bandit({s1(0.5), s1(-0.5)});
  EXPECT_TRUE(are_neighbors(g, 0, 1));
  EXPECT_FALSE(are_neighbors(g, 0, 0));
  EXPECT_EQ(neighborhood(g, 0, 1).dimension, 0u);
}

TEST(Neighbors, SquareCorners) {
  const double a = 0.35;
  const Game g = bandit({v2(a, a), v2(a, -a), v2(-a, a), v2(-a, -a)});
  const std::vector<std::pair<Index, Index>> expected = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
  EXPECT_EQ(neighbor_edges(g), expected);
  EXPECT_FALSE(are_neighbors(g, 0, 3));
  EXPECT_FALSE(are_neighbors(g, 1, 2));
  // The face between adjacent corners is a ray; its witness ties the pair.
  const auto nb = neighborhood(g, 0, 1);
  EXPECT_NEAR((g.action(0) - g.action(1)).dot(nb.witness), 0.0, 1e-9);
  EXPECT_GT((g.action(0) - g.action(3)).dot(nb.witness), 1e-6);
}

TEST(Neighbors, RequiresParetoActions) {
  const Game g = bandit({v2(0.5, 0), v2(0, 0.5), v2(0, 0), v2(0.2, 0.2)});
  EXPECT_THROW(neighborhood(g, 0, 3), InvalidArgument);
}

TEST(Neighbors, DegenerateMidpointJoinsTheNeighborhood) {
  const Game g = bandit({v2(0.5, 0), v2(0, 0.5), v2(0.25, 0.25)});
  const auto nb = neighborhood(g, 0, 1);
  EXPECT_EQ(nb.dimension, 1u);
  EXPECT_EQ(nb.members, (std::vector<Index>{0, 1, 2}));
}

TEST(Observability, Global) {
  EXPECT_TRUE(is_globally_observable(bandit({v2(0.5, 0), v2(0, 0.5)})));
  EXPECT_FALSE(is_globally_observable(zero_ops({v2(0.5, 0), v2(0, 0.5)})));
  EXPECT_TRUE(is_globally_observable(observer_game()));
}

TEST(Observability, Local) {
  EXPECT_TRUE(is_locally_observable(bandit({v2(0.5, 0), v2(0, 0.5)})));
  EXPECT_FALSE(is_locally_observable(observer_game()));
  const Game full = make({v2(0.5, 0), v2(0, 0.5), v2(-0.3, -0.3)},
                         std::vector<Matrix>(3, Matrix::Identity(2, 2)));
  EXPECT_TRUE(is_locally_observable(full));
}

TEST(Observability, InSpan) {
  Matrix m(3, 1);
  m << 1, 0, 0;
  EXPECT_TRUE(in_span(m, Vector::Unit(3, 0) * 5.0));
  EXPECT_FALSE(in_span(m, Vector::Unit(3, 1)));
  EXPECT_TRUE(in_span(m, Vector::Zero(3)));
  EXPECT_FALSE(in_span(Matrix::Zero(3, 2), Vector::Unit(3, 2)));
}

TEST(Alignment, Examples) {
  const Game b = bandit({v2(0.5, 0), v2(0, 0.5)});
  EXPECT_NEAR(alignment_upper(b, {0, 1}), 4.0, 1e-9);
  EXPECT_EQ(alignment_upper(b, {0}), 0.0);
  EXPECT_NEAR(alignment_upper(observer_game(), {0, 1}, std::vector<Index>{2}), 4.0, 1e-9);
  EXPECT_EQ(alignment_upper(zero_ops({v2(0.5, 0), v2(0, 0.5)}), {0, 1}), kInf);
}

TEST(AlignmentProperty, BanditBoundedByFour) {
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const Game g = testing::random_bandit(1 + trial % 4, 2 + trial % 7, rng);
    const auto pareto = pareto_actions(g);
    EXPECT_LE(alignment_upper(g, pareto), 4.0 + 1e-6);
  }
}

TEST(AlignmentProperty, MonteCarloBelowUpper) {
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const Game g = testing::random_game(1 + trial % 3, 2 + trial % 5, rng);
    const auto subset = pareto_actions(g);
    const double upper = alignment_upper(g, subset);
    const double lower = alignment_lower_mc(g, subset, 2000, rng);
    EXPECT_LE(lower, upper * (1.0 + 1e-6) + 1e-9);
  }
}

TEST(AlignmentProperty, MonteCarloReachesBanditPairValue) {
  Rng rng(43);
  const Game b = bandit({v2(0.5, 0), v2(0, 0.5)});
  const double lower = alignment_lower_mc(b, {0, 1}, 10000, rng);
  // Sup of <x - y, v>^2 / max(<x, v>^2, <y, v>^2) is 4, approached along v ~ (1, -1).
  EXPECT_GT(lower, 3.9);
  EXPECT_LE(lower, 4.0 + 1e-9);
}

TEST(Alignment, DuelingHalfHalf) {
  PresetSpec spec;
  spec.kind = PresetKind::dueling_avg;
  Rng rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    spec.actions.clear();
    for (int i = 0; i < 4; ++i) spec.actions.push_back(testing::random_in_ball(3, rng, 1.0));
    const Game g = build_game(spec);
    for (Index x1 = 0; x1 < 4; ++x1) {
      for (Index y2 = 0; y2 < 4; ++y2) {
        const Index x2 = (x1 + 1) % 4, y1 = (y2 + 2) % 4;
        EXPECT_LE(dueling_alignment_upper(g, 4, x1, x2, y1, y2), 1.0);
      }
    }
  }
  EXPECT_THROW(dueling_alignment_upper(bandit({v2(0.5, 0), v2(0, 0.5), v2(0, 0)}), 2, 0, 0, 0, 0),
               InvalidArgument);
}

TEST(Classify, Examples) {
  EXPECT_EQ(classify(bandit({v2(0.5, 0), v2(0.5, 0)})).regime, Regime::trivial);
  const auto b = classify(bandit({v2(0.5, 0), v2(0, 0.5)}));
  EXPECT_EQ(b.regime, Regime::sqrt_n);
  ASSERT_TRUE(b.alignment_upper);
  EXPECT_NEAR(*b.alignment_upper, 4.0, 1e-9);
  EXPECT_EQ(classify(zero_ops({v2(0.5, 0), v2(0, 0.5)})).regime, Regime::hopeless);
  const auto o = classify(observer_game());
  EXPECT_EQ(o.regime, Regime::n_two_thirds);
  EXPECT_TRUE(o.globally_observable);
  EXPECT_FALSE(o.locally_observable);
}

TEST(Classify, CollinearPairIsNotTrivial) {
  // Two distinct collinear points are both extreme points of their hull.
  const auto r = classify(bandit({v2(0.5, 0), v2(0.25, 0)}));
  EXPECT_EQ(r.pareto.size(), 2u);
  EXPECT_EQ(r.regime, Regime::sqrt_n);
}

TEST(Classify, RegimeNames) {
  EXPECT_STREQ(regime_name(Regime::trivial), "trivial");
  EXPECT_STREQ(regime_name(Regime::sqrt_n), "sqrt_n");
  EXPECT_STREQ(regime_name(Regime::n_two_thirds), "n_two_thirds");
  EXPECT_STREQ(regime_name(Regime::hopeless), "hopeless");
}

TEST(ClassifyProperty, LocalImpliesGlobal) {
  Rng rng(45);
  for (int trial = 0; trial < 1000; ++trial) {
    const Game g = testing::random_game(1 + trial % 4, 2 + trial % 7, rng);
    if (is_locally_observable(g)) {
      EXPECT_TRUE(is_globally_observable(g)) << "trial " << trial;
    }
  }
}

TEST(ClassifyProperty, NeighborGraphConnected) {
  Rng rng(46);
  for (int trial = 0; trial < 200; ++trial) {
    const Game g = testing::random_game(1 + trial % 4, 2 + trial % 7, rng);
    const auto pareto = pareto_actions(g);
    if (pareto.size() < 2) continue;
    const auto edges = neighbor_edges(g);
    std::vector<Index> parent(g.size());
    std::iota(parent.begin(), parent.end(), Index{0});
    auto find = [&](Index x) {
      while (parent[x] != x) x = parent[x];
      return x;
    };
    for (const auto& [a, b] : edges) parent[find(a)] = find(b);
    for (Index p : pareto) EXPECT_EQ(find(p), find(pareto.front())) << "trial " << trial;
  }
}

TEST(ClassifyProperty, InvariantUnderPermutationAndDominatedActions) {
  Rng rng(47);
  for (int trial = 0; trial < 100; ++trial) {
    const Game g = testing::random_game(1 + trial % 3, 2 + trial % 5, rng);
    const Regime base = classify(g).regime;

    std::vector<Index> perm = g.all_indices();
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Vector> xs;
    std::vector<Matrix> ops;
    for (Index i : perm) {
      xs.push_back(g.action(i));
      ops.push_back(g.op(i));
    }
    EXPECT_EQ(classify(make(xs, ops)).regime, base) << "permutation, trial " << trial;

    Vector centroid = Vector::Zero(static_cast<Eigen::Index>(g.dim()));
    for (const auto& x : xs) centroid += x / static_cast<double>(xs.size());
    xs.push_back(centroid);
    ops.push_back(Matrix::Zero(static_cast<Eigen::Index>(g.dim()), 1));
    EXPECT_EQ(classify(make(xs, ops)).regime, base) << "dominated, trial " << trial;
  }
}

TEST(ClassifyProperty, DegenerateCellsCoveredByParetoCells) {
  Rng rng(48);
  for (int trial = 0; trial < 100; ++trial) {
    const Game g = testing::random_game(2 + trial % 3, 3 + trial % 5, rng);
    const auto pareto = pareto_actions(g);
    for (int s = 0; s < 50; ++s) {
      const Vector th = testing::random_unit(g.dim(), rng);
      double all = -kInf, ext = -kInf;
      for (Index i = 0; i < g.size(); ++i) all = std::max(all, g.action(i).dot(th));
      for (Index i : pareto) ext = std::max(ext, g.action(i).dot(th));
      EXPECT_NEAR(all, ext, 1e-9);
    }
  }
}

TEST(Classify, PresetRegimes) {
  PresetSpec spec;
  spec.kind = PresetKind::laser;
  spec.laser_variant = LaserVariant::invasive;
  EXPECT_EQ(classify(build_game(spec)).regime, Regime::sqrt_n);
  spec.laser_variant = LaserVariant::transductive;
  EXPECT_EQ(classify(build_game(spec)).regime, Regime::n_two_thirds);

  spec = PresetSpec{};
  spec.kind = PresetKind::full_info;
  spec.actions = {v2(0.5, 0), v2(0, 0.5), v2(-0.3, 0.1)};
  EXPECT_EQ(classify(build_game(spec)).regime, Regime::sqrt_n);
}

}  // namespace
}  // namespace pmids
