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

#ifndef PMIDS_POLICY_HPP
#define PMIDS_POLICY_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "pmids/common.hpp"
#include "pmids/estimator.hpp"
#include "pmids/game.hpp"

namespace pmids {

enum class PolicyKind {
  ids_full,
  ids_directed,
  ids_deterministic,
  ucb,
  greedy,
  uniform,
};

inline const char* policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::ids_full: return "ids_full";
    case PolicyKind::ids_directed: return "ids_directed";
    case PolicyKind::ids_deterministic: return "ids_deterministic";
    case PolicyKind::ucb: return "ucb";
    case PolicyKind::greedy: return "greedy";
    case PolicyKind::uniform: return "uniform";
  }
  return "unknown";
}

inline PolicyKind parse_policy(std::string_view name) {
  for (auto k : {PolicyKind::ids_full, PolicyKind::ids_directed,
                 PolicyKind::ids_deterministic, PolicyKind::ucb,
                 PolicyKind::greedy, PolicyKind::uniform}) {
    if (name == policy_name(k)) return k;
  }
  throw InvalidArgument("unknown policy '" + std::string(name) + "'");
}

/// A sampling distribution together with the per-action diagnostics it was
/// computed from. IDS variants use at most two support points; `uniform`
/// stores a dense distribution.
struct PolicyDecision {
  std::vector<Index> support;
  std::vector<double> probs;
  Vector gaps;
  Vector infos;
  double ratio = 0.0;
  /// Set when every action had zero information and positive gap, so the
  /// minimum-gap action was played instead of a ratio minimizer.
  bool fallback = false;

  static PolicyDecision point_mass(Index i) { return {{i}, {1.0}, {}, {}, 0.0, false}; }

  template <class Rng>
  Index sample(Rng& rng) const {
    if (support.size() == 1) return support.front();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    for (Index k = 0; k < support.size(); ++k) {
      u -= probs[k];
      if (u < 0.0) return support[k];
    }
    return support.back();
  }
};

/// Mixture (1 - p) * delta_first + p * delta_second and its ratio.
struct RatioMinimizer {
  Index first = 0;
  Index second = 0;
  double p = 0.0;
  double ratio = 0.0;
};

/// Psi = gap^2 / info with 0/0 -> 0 and positive/0 -> inf.
inline double ratio_value(double gap, double info) {
  if (gap <= 0.0) return 0.0;
  if (info <= 0.0) return kInf;
  return gap * gap / info;
}

namespace detail {

struct Mixture {
  double p;
  double ratio;
};

// Minimizes (g0 + w((1-p) a + p b))^2 / (i0 + w((1-p) ia + p ib)) over
// p in [0, 1]. The objective is a ratio of a convex quadratic and a positive
// affine function, so the minimum sits at an endpoint or at the single
// stationary point.
inline Mixture best_mixture(double a, double b, double ia, double ib,
                            double g0 = 0.0, double i0 = 0.0, double w = 1.0) {
  const double alpha = g0 + w * a;
  const double beta = w * (b - a);
  const double gamma = i0 + w * ia;
  const double delta = w * (ib - ia);
  auto eval = [&](double p) {
    return ratio_value(alpha + beta * p, gamma + delta * p);
  };
  Mixture best{0.0, eval(0.0)};
  const double den = beta * delta;
  if (den != 0.0) {
    const double p = std::clamp((alpha * delta - 2.0 * beta * gamma) / den, 0.0, 1.0);
    const double r = eval(p);
    if (r < best.ratio) best = {p, r};
  }
  const double r1 = eval(1.0);
  if (r1 < best.ratio) best = {1.0, r1};
  return best;
}

}  // namespace detail

/// Exact minimizer of the information ratio over all one- and two-point
/// distributions; lexicographically smallest pair on ties. Returns nullopt
/// when every action has zero information and positive gap.
inline std::optional<RatioMinimizer> min_ratio_pair(const Vector& gaps,
                                                    const Vector& infos) {
  require(gaps.size() == infos.size() && gaps.size() >= 1,
          "min_ratio_pair: gaps and infos must be non-empty and equal length");
  const auto n = static_cast<Index>(gaps.size());
  RatioMinimizer best{0, 0, 0.0, kInf};
  for (Index i = 0; i < n; ++i) {
    const auto ei = static_cast<Eigen::Index>(i);
    for (Index j = i; j < n; ++j) {
      const auto ej = static_cast<Eigen::Index>(j);
      if (i == j) {
        const double r = ratio_value(gaps(ei), infos(ei));
        if (r < best.ratio) best = {i, i, 0.0, r};
        continue;
      }
      const auto m = detail::best_mixture(gaps(ei), gaps(ej), infos(ei), infos(ej));
      if (m.ratio < best.ratio) best = {i, j, m.p, m.ratio};
    }
  }
  if (!std::isfinite(best.ratio)) return std::nullopt;
  return best;
}

/// Psi of an arbitrary distribution given by (support, probs).
inline double information_ratio(const Vector& gaps, const Vector& infos,
                                const std::vector<Index>& support,
                                const std::vector<double>& probs) {
  double g = 0.0, i = 0.0;
  for (Index k = 0; k < support.size(); ++k) {
    g += probs[k] * gaps(static_cast<Eigen::Index>(support[k]));
    i += probs[k] * infos(static_cast<Eigen::Index>(support[k]));
  }
  return ratio_value(g, i);
}

// ---------------------------------------------------------------------------
// Gap estimates

/// X^T V^{-1} X for the game's reward vectors.
inline Matrix uncertainty_gram(const EstimatorState& state, const Game& game) {
  require(state.dim() == game.dim(), "estimator and game dimensions differ");
  const Matrix& x = game.action_matrix();
  return x.transpose() * state.gram_inverse() * x;
}

namespace detail {

inline double pair_norm(const Matrix& g, Index i, Index j) {
  const auto a = static_cast<Eigen::Index>(i);
  const auto b = static_cast<Eigen::Index>(j);
  return std::sqrt(std::max(0.0, g(a, a) + g(b, b) - 2.0 * g(a, b)));
}

}  // namespace detail

/// Delta_t(x) = min{1, max_y <y - x, theta_hat> + beta^{1/2} ||x - y||_{V^{-1}}}
/// for every action.
inline Vector gaps_upper(const EstimatorState& state, const Game& game,
                         double beta_sqrt) {
  require(beta_sqrt >= 0.0, "gap_upper: beta must be >= 0");
  const Matrix g = uncertainty_gram(state, game);
  const Vector mean = game.action_matrix().transpose() * state.theta_hat();
  const Index n = game.size();
  Vector out(static_cast<Eigen::Index>(n));
  for (Index x = 0; x < n; ++x) {
    double best = 0.0;
    for (Index y = 0; y < n; ++y) {
      if (y == x) continue;
      const double v = mean(static_cast<Eigen::Index>(y)) -
                       mean(static_cast<Eigen::Index>(x)) +
                       beta_sqrt * detail::pair_norm(g, x, y);
      best = std::max(best, v);
    }
    out(static_cast<Eigen::Index>(x)) = std::min(1.0, best);
  }
  return out;
}

inline double gap_upper(const EstimatorState& state, const Game& game,
                        double beta_sqrt, Index x) {
  require(x < game.size(), "gap_upper: invalid action index");
  return gaps_upper(state, game, beta_sqrt)(static_cast<Eigen::Index>(x));
}

/// Separable relaxation max_y UCB(y) - LCB(x), not truncated. All actions in
/// O(|X|) after the Gram diagonal is formed.
inline Vector gaps_relaxed(const EstimatorState& state, const Game& game,
                           double beta_sqrt) {
  require(beta_sqrt >= 0.0, "gap_relaxed: beta must be >= 0");
  const Index n = game.size();
  if (n == 1) return Vector::Zero(1);
  const Matrix& xs = game.action_matrix();
  const Vector mean = xs.transpose() * state.theta_hat();
  const Vector width =
      (xs.transpose() * state.gram_inverse() * xs).diagonal().cwiseMax(0.0).cwiseSqrt();
  const Vector ucb = mean + beta_sqrt * width;
  const Vector lcb = mean - beta_sqrt * width;
  return (Vector::Constant(lcb.size(), ucb.maxCoeff()) - lcb);
}

inline double gap_relaxed(const EstimatorState& state, const Game& game,
                          double beta_sqrt, Index x) {
  require(x < game.size(), "gap_relaxed: invalid action index");
  return gaps_relaxed(state, game, beta_sqrt)(static_cast<Eigen::Index>(x));
}

/// Actions passing the relaxed plausibility test
/// max_y <y - x, theta_hat> - beta^{1/2} ||y - x||_{V^{-1}} <= 0.
inline std::vector<Index> plausible_set(const EstimatorState& state,
                                        const Game& game, double beta_sqrt) {
  const Matrix g = uncertainty_gram(state, game);
  const Vector mean = game.action_matrix().transpose() * state.theta_hat();
  std::vector<Index> out;
  for (Index x = 0; x < game.size(); ++x) {
    double lower = 0.0;
    for (Index y = 0; y < game.size(); ++y) {
      if (y == x) continue;
      lower = std::max(lower, mean(static_cast<Eigen::Index>(y)) -
                                  mean(static_cast<Eigen::Index>(x)) -
                                  beta_sqrt * detail::pair_norm(g, x, y));
    }
    if (lower <= 1e-12) out.push_back(x);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Information gains

/// log det(I_m + A^T V^{-1} A).
inline double info_gain_full(const EstimatorState& state, const Matrix& a) {
  require(static_cast<Index>(a.rows()) == state.dim(),
          "info_gain_full: operator must have d rows");
  if (a.isZero(0.0)) return 0.0;
  const Matrix m = a.transpose() * state.gram_inverse() * a;
  return std::max(0.0, logdet_spd(Matrix::Identity(m.rows(), m.cols()) + m));
}

/// log ||w||^2_{V^{-1}} - log ||w||^2_{(V + A A^T)^{-1}}, evaluated through
/// the Woodbury identity.
inline double info_gain_directed(const EstimatorState& state, const Matrix& a,
                                 const Vector& w) {
  require(static_cast<Index>(a.rows()) == state.dim() &&
              static_cast<Index>(w.size()) == state.dim(),
          "info_gain_directed: dimension mismatch");
  require(!w.isZero(0.0), "info_gain_directed: direction w must be non-zero");
  if (a.isZero(0.0)) return 0.0;
  const Matrix& vinv = state.gram_inverse();
  const Vector vw = vinv * w;
  const double q = w.dot(vw);
  const Vector u = a.transpose() * vw;
  const Matrix s = Matrix::Identity(a.cols(), a.cols()) + a.transpose() * vinv * a;
  const double r = u.dot(s.llt().solve(u));
  const double frac = std::clamp(r / q, 0.0, 1.0 - 1e-300);
  return std::max(0.0, -std::log1p(-frac));
}

/// Difference of plausible actions with the largest ||.||_{V^{-1}}; nullopt
/// when all plausible actions coincide.
inline std::optional<Vector> most_uncertain_direction(
    const EstimatorState& state, const Game& game,
    const std::vector<Index>& plausible) {
  const Matrix g = uncertainty_gram(state, game);
  double best = 0.0;
  std::optional<Vector> w;
  for (Index a = 0; a < plausible.size(); ++a) {
    for (Index b = a + 1; b < plausible.size(); ++b) {
      const double v = detail::pair_norm(g, plausible[a], plausible[b]);
      if (v > best) {
        best = v;
        w = game.action(plausible[a]) - game.action(plausible[b]);
      }
    }
  }
  if (w && w->isZero(0.0)) return std::nullopt;
  return w;
}

inline Vector infos_full(const EstimatorState& state, const Game& game) {
  Vector out(static_cast<Eigen::Index>(game.size()));
  for (Index i = 0; i < game.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = info_gain_full(state, game.op(i));
  }
  return out;
}

inline Vector infos_directed(const EstimatorState& state, const Game& game,
                             const Vector& w) {
  Vector out(static_cast<Eigen::Index>(game.size()));
  for (Index i = 0; i < game.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = info_gain_directed(state, game.op(i), w);
  }
  return out;
}

// ---------------------------------------------------------------------------
// UCB relation

/// argmax <x, theta_hat> + beta^{1/2} ||x||_{V^{-1}}, lowest index on ties.
inline Index ucb_action(const EstimatorState& state, const Game& game,
                        double beta_sqrt) {
  const Matrix& xs = game.action_matrix();
  const Vector mean = xs.transpose() * state.theta_hat();
  const Vector width =
      (xs.transpose() * state.gram_inverse() * xs).diagonal().cwiseMax(0.0).cwiseSqrt();
  const Vector score = mean + beta_sqrt * width;
  Index best = 0;
  for (Index i = 1; i < game.size(); ++i) {
    if (score(static_cast<Eigen::Index>(i)) > score(static_cast<Eigen::Index>(best))) best = i;
  }
  return best;
}

/// Deterministic ratio minimizer using the relaxed gap and the linearized
/// information trace(A^T V^{-1} A). In bandit games this picks the UCB action.
inline Index relaxed_deterministic_ids(const EstimatorState& state,
                                       const Game& game, double beta_sqrt) {
  const Vector gaps = gaps_relaxed(state, game, beta_sqrt);
  Index best = 0;
  double best_ratio = kInf;
  for (Index i = 0; i < game.size(); ++i) {
    const Matrix& a = game.op(i);
    const double info = (a.transpose() * state.gram_inverse() * a).trace();
    const double r = ratio_value(gaps(static_cast<Eigen::Index>(i)), info);
    if (r < best_ratio) {
      best_ratio = r;
      best = i;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Decision rule

namespace detail {

inline Index argmin_lowest(const Vector& v) {
  Index best = 0;
  for (Index i = 1; i < static_cast<Index>(v.size()); ++i) {
    if (v(static_cast<Eigen::Index>(i)) < v(static_cast<Eigen::Index>(best))) best = i;
  }
  return best;
}

inline Index argmax_lowest(const Vector& v) {
  Index best = 0;
  for (Index i = 1; i < static_cast<Index>(v.size()); ++i) {
    if (v(static_cast<Eigen::Index>(i)) > v(static_cast<Eigen::Index>(best))) best = i;
  }
  return best;
}

inline void set_point_mass(PolicyDecision& d, Index i) {
  d.support = {i};
  d.probs = {1.0};
}

}  // namespace detail

/// Builds the two-point IDS decision from per-action gaps and information,
/// falling back to the minimum-gap action when no action is informative.
inline PolicyDecision ids_decision(Vector gaps, Vector infos) {
  PolicyDecision d;
  d.gaps = std::move(gaps);
  d.infos = std::move(infos);
  const auto m = min_ratio_pair(d.gaps, d.infos);
  if (!m) {
    detail::set_point_mass(d, detail::argmin_lowest(d.gaps));
    d.fallback = true;
  } else if (m->first == m->second || m->p == 0.0) {
    detail::set_point_mass(d, m->first);
  } else if (m->p == 1.0) {
    detail::set_point_mass(d, m->second);
  } else {
    d.support = {m->first, m->second};
    d.probs = {1.0 - m->p, m->p};
  }
  d.ratio = information_ratio(d.gaps, d.infos, d.support, d.probs);
  return d;
}

inline PolicyDecision decide(PolicyKind kind, const EstimatorState& state,
                             const Game& game, double delta) {
  const double beta = state.beta_radius(delta);
  Vector gaps = gaps_upper(state, game, beta);

  switch (kind) {
    case PolicyKind::ids_full:
      return ids_decision(std::move(gaps), infos_full(state, game));

    case PolicyKind::ids_directed: {
      const auto plausible = plausible_set(state, game, beta);
      const auto w = most_uncertain_direction(state, game, plausible);
      // Without a direction to resolve, fall back to the full information gain.
      Vector infos = w ? infos_directed(state, game, *w) : infos_full(state, game);
      return ids_decision(std::move(gaps), std::move(infos));
    }

    case PolicyKind::ids_deterministic: {
      PolicyDecision d;
      d.gaps = std::move(gaps);
      d.infos = infos_full(state, game);
      Index best = 0;
      double best_ratio = kInf;
      for (Index i = 0; i < game.size(); ++i) {
        const auto ei = static_cast<Eigen::Index>(i);
        const double r = ratio_value(d.gaps(ei), d.infos(ei));
        if (r < best_ratio) {
          best_ratio = r;
          best = i;
        }
      }
      if (!std::isfinite(best_ratio)) {
        best = detail::argmin_lowest(d.gaps);
        d.fallback = true;
      }
      detail::set_point_mass(d, best);
      d.ratio = information_ratio(d.gaps, d.infos, d.support, d.probs);
      return d;
    }

    case PolicyKind::ucb:
    case PolicyKind::greedy: {
      PolicyDecision d;
      d.gaps = std::move(gaps);
      d.infos = infos_full(state, game);
      const Index pick = kind == PolicyKind::ucb
                             ? ucb_action(state, game, beta)
                             : detail::argmax_lowest(game.action_matrix().transpose() *
                                                     state.theta_hat());
      detail::set_point_mass(d, pick);
      d.ratio = information_ratio(d.gaps, d.infos, d.support, d.probs);
      return d;
    }

    case PolicyKind::uniform: {
      PolicyDecision d;
      d.gaps = std::move(gaps);
      d.infos = infos_full(state, game);
      const Index n = game.size();
      for (Index i = 0; i < n; ++i) {
        d.support.push_back(i);
        d.probs.push_back(1.0 / static_cast<double>(n));
      }
      d.ratio = information_ratio(d.gaps, d.infos, d.support, d.probs);
      return d;
    }
  }
  throw InvalidArgument("decide: unknown policy kind");
}

}  // namespace pmids

#endif  // PMIDS_POLICY_HPP
