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

#ifndef PMIDS_CLASSIFIER_HPP
#define PMIDS_CLASSIFIER_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "pmids/common.hpp"
#include "pmids/game.hpp"
#include "pmids/lp.hpp"

namespace pmids {

enum class Regime { trivial, sqrt_n, n_two_thirds, hopeless };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::trivial: return "trivial";
    case Regime::sqrt_n: return "sqrt_n";
    case Regime::n_two_thirds: return "n_two_thirds";
    case Regime::hopeless: return "hopeless";
  }
  return "unknown";
}

struct ClassificationReport {
  std::vector<Index> pareto;
  std::vector<std::pair<Index, Index>> neighbor_edges;
  bool globally_observable = false;
  bool locally_observable = false;
  Regime regime = Regime::hopeless;
  std::optional<double> alignment_upper;
};

namespace detail {

inline Eigen::Index ei(Index i) { return static_cast<Eigen::Index>(i); }

// Numerical rank by singular values relative to the largest one.
inline Index numerical_rank(const Matrix& m, double rel_tol = tol::kRank) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector s = svd.singularValues();
  if (s.size() == 0 || s(0) <= rel_tol) return 0;
  Index r = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s(k) > rel_tol * std::max(1.0, s(0))) ++r;
  }
  return r;
}

inline Matrix columns_of(const std::vector<Vector>& cols, Index d) {
  Matrix m(ei(d), static_cast<Eigen::Index>(cols.size()));
  for (Index k = 0; k < cols.size(); ++k) m.col(ei(k)) = cols[k];
  return m;
}

// Result of refining the tied set of a cone {theta in box : <x_i - x_z, theta>
// >= 0 for all z, = 0 for z in tied}.
struct ConeFace {
  std::vector<Index> tied;
  Index dimension = 0;
  Vector witness;
};

// Moves every implicit equality of the cone into the tied set. A constraint z
// is an implicit equality iff its maximum over the cone is zero.
inline ConeFace refine_cone(const Game& game, Index i, std::vector<Index> tied) {
  const Index d = game.dim();
  const Index n = game.size();
  std::vector<bool> is_tied(n, false);
  for (Index z : tied) is_tied[z] = true;
  const Vector xi = game.action(i);

  Vector witness = Vector::Zero(ei(d));
  bool changed = true;
  for (Index pass = 0; changed && pass <= n; ++pass) {
    changed = false;
    witness.setZero();
    Index free_count = 0;
    for (Index z = 0; z < n; ++z) {
      if (is_tied[z]) continue;
      lp::Problem prob(d);
      for (Index k = 0; k < d; ++k) prob.set_bounds(k, -1.0, 1.0);
      for (Index w = 0; w < n; ++w) {
        const Vector row = xi - game.action(w);
        if (row.isZero(0.0)) continue;
        prob.add_constraint(row, is_tied[w] ? lp::Sense::eq : lp::Sense::ge, 0.0);
      }
      prob.set_objective(xi - game.action(z), true);
      const auto res = prob.solve();
      if (res.status != lp::Status::optimal || res.objective <= tol::kHull) {
        is_tied[z] = true;
        changed = true;
      } else {
        witness += res.x;
        ++free_count;
      }
    }
    if (free_count > 0) witness /= static_cast<double>(free_count);
  }

  ConeFace face;
  std::vector<Vector> diffs;
  for (Index z = 0; z < n; ++z) {
    if (!is_tied[z]) continue;
    face.tied.push_back(z);
    const Vector diff = xi - game.action(z);
    if (!diff.isZero(0.0)) diffs.push_back(diff);
  }
  face.dimension = d - numerical_rank(columns_of(diffs, d));
  face.witness = witness;
  return face;
}

}  // namespace detail

/// Extreme points of the convex hull of the actions. A point is extreme when
/// no convex combination of the remaining distinct points reproduces it; of
/// several identical vectors only the lowest index can qualify.
inline std::vector<Index> pareto_actions(const Game& game) {
  const Index n = game.size();
  const Index d = game.dim();
  std::vector<Index> out;
  for (Index i = 0; i < n; ++i) {
    const Vector xi = game.action(i);
    bool duplicate = false;
    std::vector<Index> others;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      if (detail::same_vector(game.action(j), xi)) {
        if (j < i) duplicate = true;
        continue;
      }
      others.push_back(j);
    }
    if (duplicate) continue;
    if (others.empty()) {
      out.push_back(i);
      continue;
    }
    // Variables: lambda (|others|), then s+ (d), then s- (d).
    const Index k = others.size();
    lp::Problem prob(k + 2 * d);
    for (Index r = 0; r < d; ++r) {
      Vector row = Vector::Zero(detail::ei(k + 2 * d));
      for (Index j = 0; j < k; ++j) {
        row(detail::ei(j)) = game.action(others[j])(detail::ei(r));
      }
      row(detail::ei(k + r)) = 1.0;
      row(detail::ei(k + d + r)) = -1.0;
      prob.add_constraint(row, lp::Sense::eq, xi(detail::ei(r)));
    }
    Vector simplex = Vector::Zero(detail::ei(k + 2 * d));
    simplex.head(detail::ei(k)).setOnes();
    prob.add_constraint(simplex, lp::Sense::eq, 1.0);
    Vector cost = Vector::Zero(detail::ei(k + 2 * d));
    cost.tail(detail::ei(2 * d)).setOnes();
    prob.set_objective(cost, false);
    const auto res = prob.solve();
    if (res.status != lp::Status::optimal || res.objective > tol::kHull) {
      out.push_back(i);
    }
  }
  return out;
}

/// Affine dimension of the cell {theta : action i is optimal}.
inline Index cell_dimension(const Game& game, Index i) {
  require(i < game.size(), "cell_dimension: invalid action index");
  return detail::refine_cone(game, i, {i}).dimension;
}

/// Face shared by the cells of two actions, with the set of actions optimal on
/// all of it and a point in its relative interior.
struct Neighborhood {
  Index dimension = 0;
  std::vector<Index> members;
  Vector witness;
};

/// Computes the common face of the cells of Pareto actions i and j. Members
/// are the actions whose cell contains the face, excluding actions whose cell
/// is the single point {0}.
inline Neighborhood neighborhood(const Game& game, Index i, Index j) {
  require(i < game.size() && j < game.size(), "neighborhood: invalid index");
  require(i != j, "neighborhood: actions must differ");
  const auto pareto = pareto_actions(game);
  require(std::find(pareto.begin(), pareto.end(), i) != pareto.end() &&
              std::find(pareto.begin(), pareto.end(), j) != pareto.end(),
          "neighborhood: both actions must be Pareto optimal");
  const auto face = detail::refine_cone(game, i, {i, j});
  Neighborhood nb;
  nb.dimension = face.dimension;
  nb.witness = face.witness;
  for (Index z : face.tied) {
    if (z == i || z == j || cell_dimension(game, z) > 0) nb.members.push_back(z);
  }
  return nb;
}

inline bool are_neighbors(const Game& game, Index i, Index j) {
  if (i == j) return false;
  return neighborhood(game, i, j).dimension + 1 == game.dim();
}

/// Whether v lies in the column span of m, judged by the residual of the
/// orthogonal projection relative to ||v||.
inline bool in_span(const Matrix& m, const Vector& v) {
  const double nv = v.norm();
  if (nv == 0.0) return true;
  if (m.cols() == 0 || m.isZero(0.0)) return false;
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const Vector s = svd.singularValues();
  Index r = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s(k) > tol::kRank * std::max(1.0, s(0))) ++r;
  }
  const Matrix u = svd.matrixU().leftCols(detail::ei(r));
  const Vector residual = v - u * (u.transpose() * v);
  return residual.norm() < tol::kSpan * nv;
}

inline bool is_globally_observable(const Game& game) {
  const auto pareto = pareto_actions(game);
  const Matrix ops = game.stacked_ops(game.all_indices());
  for (Index a = 0; a < pareto.size(); ++a) {
    for (Index b = a + 1; b < pareto.size(); ++b) {
      if (!in_span(ops, game.action(pareto[a]) - game.action(pareto[b]))) return false;
    }
  }
  return true;
}

/// Neighbor pairs among the Pareto actions, in lexicographic order.
inline std::vector<std::pair<Index, Index>> neighbor_edges(const Game& game) {
  const auto pareto = pareto_actions(game);
  std::vector<std::pair<Index, Index>> edges;
  for (Index a = 0; a < pareto.size(); ++a) {
    for (Index b = a + 1; b < pareto.size(); ++b) {
      if (are_neighbors(game, pareto[a], pareto[b])) edges.emplace_back(pareto[a], pareto[b]);
    }
  }
  return edges;
}

inline bool is_locally_observable(const Game& game) {
  for (const auto& [i, j] : neighbor_edges(game)) {
    const auto nb = neighborhood(game, i, j);
    if (!in_span(game.stacked_ops(nb.members), game.action(i) - game.action(j))) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Alignment bounds

namespace detail {

// Group norms sum_z ||w_z|| for a stacked coefficient vector.
inline double group_norm_sum(const Vector& w, const std::vector<Index>& sizes) {
  double s = 0.0;
  Eigen::Index off = 0;
  for (Index m : sizes) {
    s += w.segment(off, static_cast<Eigen::Index>(m)).norm();
    off += static_cast<Eigen::Index>(m);
  }
  return s;
}

inline Vector min_norm_solution(const Matrix& a, const Vector& b) {
  return a.completeOrthogonalDecomposition().solve(b);
}

// Smallest sum of group norms found for A w = b, trying the least-squares
// solutions over all observers and over the pair's own operators, then
// refining with iteratively reweighted least squares. Returns +inf when b is
// outside the span.
inline double group_l1_bound(const Game& game, const std::vector<Index>& observers,
                             const std::vector<Index>& preferred, const Vector& b) {
  if (b.isZero(0.0)) return 0.0;
  const Matrix a = game.stacked_ops(observers);
  if (!in_span(a, b)) return kInf;
  std::vector<Index> sizes;
  for (Index z : observers) sizes.push_back(game.obs_dim(z));
  const double tol = tol::kSpan * std::max(1.0, b.norm());
  auto feasible = [&](const Vector& w) { return (a * w - b).norm() <= 10 * tol; };

  double best = kInf;
  Vector w = min_norm_solution(a, b);
  if (feasible(w)) best = group_norm_sum(w, sizes);

  // Restricted to the preferred observers.
  {
    Vector mask = Vector::Zero(a.cols());
    Eigen::Index off = 0;
    for (Index k = 0; k < observers.size(); ++k) {
      const auto m = static_cast<Eigen::Index>(sizes[k]);
      if (std::find(preferred.begin(), preferred.end(), observers[k]) != preferred.end()) {
        mask.segment(off, m).setOnes();
      }
      off += m;
    }
    const Matrix am = a * mask.asDiagonal();
    if (in_span(am, b)) {
      const Vector wr = min_norm_solution(am, b).cwiseProduct(mask);
      if (feasible(wr)) best = std::min(best, group_norm_sum(wr, sizes));
    }
  }

  for (int it = 0; it < 100; ++it) {
    Vector weights(a.cols());
    Eigen::Index off = 0;
    for (Index m : sizes) {
      const auto mm = static_cast<Eigen::Index>(m);
      weights.segment(off, mm).setConstant(w.segment(off, mm).norm() + 1e-12);
      off += mm;
    }
    const Matrix aw = a * weights.asDiagonal();
    const Matrix gram = aw * a.transpose();
    const Vector y = gram.completeOrthogonalDecomposition().solve(b);
    const Vector next = weights.asDiagonal() * (a.transpose() * y);
    if (!feasible(next)) break;
    const double val = group_norm_sum(next, sizes);
    best = std::min(best, val);
    if ((next - w).norm() <= 1e-12 * std::max(1.0, w.norm())) break;
    w = next;
  }
  return best;
}

}  // namespace detail

/// Upper bound on the alignment constant of a subset: the maximum over pairs
/// of (sum_z ||w_z||)^2 for coefficients with sum_z A_z w_z = x - y. The
/// observers default to the subset itself. +inf when some difference is not
/// in the observers' span.
inline double alignment_upper(const Game& game, const std::vector<Index>& subset,
                              std::optional<std::vector<Index>> observers = std::nullopt) {
  for (Index z : subset) require(z < game.size(), "alignment_upper: invalid index");
  const std::vector<Index> obs = observers ? *observers : subset;
  double worst = 0.0;
  for (Index a = 0; a < subset.size(); ++a) {
    for (Index b = a + 1; b < subset.size(); ++b) {
      const Vector diff = game.action(subset[a]) - game.action(subset[b]);
      const double s = detail::group_l1_bound(game, obs, {subset[a], subset[b]}, diff);
      if (!std::isfinite(s)) return kInf;
      worst = std::max(worst, s * s);
    }
  }
  return worst;
}

/// Monte-Carlo lower estimate of the alignment constant: max over sampled
/// unit v and pairs of <x - y, v>^2 / max_z ||A_z^T v||^2.
template <class Rng>
double alignment_lower_mc(const Game& game, const std::vector<Index>& subset,
                          Index samples, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index d = game.dim();
  double best = 0.0;
  for (Index s = 0; s < samples; ++s) {
    Vector v(detail::ei(d));
    for (Index k = 0; k < d; ++k) v(detail::ei(k)) = normal(rng);
    const double nv = v.norm();
    if (nv == 0.0) continue;
    v /= nv;
    double den = 0.0;
    for (Index z : subset) den = std::max(den, (game.op(z).transpose() * v).squaredNorm());
    double num = 0.0;
    for (Index a = 0; a < subset.size(); ++a) {
      for (Index b = a + 1; b < subset.size(); ++b) {
        const double p = (game.action(subset[a]) - game.action(subset[b])).dot(v);
        num = std::max(num, p * p);
      }
    }
    if (num <= 0.0) continue;
    if (den <= 0.0) return kInf;
    best = std::max(best, num / den);
  }
  return best;
}

/// Bound for the dueling game with average reward between plays (x1, x2) and
/// (y1, y2) of a ground set of size k, using coefficient 1/2 on the
/// operators of (x1, y1) and (x2, y2). Throws if the decomposition does not
/// reproduce the reward difference.
inline double dueling_alignment_upper(const Game& game, Index k, Index x1, Index x2,
                                      Index y1, Index y2) {
  require(game.size() == k * k, "dueling_alignment_upper: game is not a k x k dueling game");
  require(x1 < k && x2 < k && y1 < k && y2 < k, "dueling_alignment_upper: invalid index");
  const Index first = dueling_index(k, x1, y1);
  const Index second = dueling_index(k, x2, y2);
  const Vector target = game.action(dueling_index(k, x1, x2)) -
                        game.action(dueling_index(k, y1, y2));
  Vector combined = 0.5 * game.op(first).col(0) + 0.5 * game.op(second).col(0);
  if ((combined - target).norm() > tol::kInvariant) {
    throw NumericalError("dueling_alignment_upper: decomposition does not match");
  }
  double s = 0.0;
  if (first == second) {
    s = game.op(first).col(0).isZero(0.0) ? 0.0 : 1.0;
  } else {
    s += game.op(first).col(0).isZero(0.0) ? 0.0 : 0.5;
    s += game.op(second).col(0).isZero(0.0) ? 0.0 : 0.5;
  }
  return s * s;
}

inline ClassificationReport classify(const Game& game) {
  ClassificationReport rep;
  rep.pareto = pareto_actions(game);
  rep.globally_observable = is_globally_observable(game);
  if (rep.pareto.size() > 1) {
    rep.neighbor_edges = neighbor_edges(game);
    rep.locally_observable = true;
    for (const auto& [i, j] : rep.neighbor_edges) {
      const auto nb = neighborhood(game, i, j);
      if (!in_span(game.stacked_ops(nb.members), game.action(i) - game.action(j))) {
        rep.locally_observable = false;
        break;
      }
    }
  } else {
    rep.locally_observable = true;
  }
  rep.locally_observable = rep.locally_observable && rep.globally_observable;

  if (rep.pareto.size() == 1) {
    rep.regime = Regime::trivial;
  } else if (rep.locally_observable) {
    rep.regime = Regime::sqrt_n;
  } else if (rep.globally_observable) {
    rep.regime = Regime::n_two_thirds;
  } else {
    rep.regime = Regime::hopeless;
  }
  if (rep.globally_observable) {
    rep.alignment_upper = alignment_upper(game, rep.pareto, game.all_indices());
  }
  return rep;
}

}  // namespace pmids

#endif  // PMIDS_CLASSIFIER_HPP
