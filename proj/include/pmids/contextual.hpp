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

#ifndef PMIDS_CONTEXTUAL_HPP
#define PMIDS_CONTEXTUAL_HPP

#include <cmath>
#include <random>
#include <vector>

#include "pmids/classifier.hpp"
#include "pmids/common.hpp"
#include "pmids/estimator.hpp"
#include "pmids/game.hpp"
#include "pmids/policy.hpp"

namespace pmids {

/// Finite set of games sharing one parameter, with a known context
/// distribution nu.
class ContextualGame {
 public:
  ContextualGame(std::vector<Game> games, Vector nu)
      : games_(std::move(games)), nu_(std::move(nu)) {
    require(!games_.empty(), "contextual game: no contexts");
    require(static_cast<Index>(nu_.size()) == games_.size(),
            "contextual game: nu must have one entry per context");
    for (const auto& g : games_) {
      require(g.dim() == games_.front().dim(),
              "contextual game: contexts must share the dimension");
    }
    require((nu_.array() >= 0.0).all(), "contextual game: nu must be non-negative");
    require(std::abs(nu_.sum() - 1.0) <= tol::kProbability,
            "contextual game: nu must sum to 1");
  }

  Index dim() const { return games_.front().dim(); }
  Index size() const { return games_.size(); }
  const Game& game(Index z) const { return games_.at(z); }
  const Vector& nu() const { return nu_; }

  template <class Rng>
  Index sample_context(Rng& rng) const {
    std::discrete_distribution<Index> dist(nu_.data(), nu_.data() + nu_.size());
    return dist(rng);
  }

 private:
  std::vector<Game> games_;
  Vector nu_;
};

struct ContextualPlan {
  std::vector<PolicyDecision> conditionals;
  double joint_ratio = 0.0;
  /// Joint ratio after the initial plan and after each sweep.
  std::vector<double> sweep_ratios;
  /// Total expected information is zero while the expected gap is positive.
  bool no_information = false;
};

/// Conditional IDS: the IDS decision on the game of the observed context.
inline PolicyDecision conditional_ids(const EstimatorState& state,
                                      const ContextualGame& cgame, Index z,
                                      double delta) {
  require(z < cgame.size(), "conditional_ids: invalid context");
  return decide(PolicyKind::ids_full, state, cgame.game(z), delta);
}

namespace detail {

inline std::pair<double, double> expected_gap_info(const PolicyDecision& d) {
  double g = 0.0, i = 0.0;
  for (Index k = 0; k < d.support.size(); ++k) {
    const auto a = static_cast<Eigen::Index>(d.support[k]);
    g += d.probs[k] * d.gaps(a);
    i += d.probs[k] * d.infos(a);
  }
  return {g, i};
}

inline double joint_ratio(const ContextualGame& cgame,
                          const std::vector<PolicyDecision>& plan) {
  double g = 0.0, i = 0.0;
  for (Index z = 0; z < cgame.size(); ++z) {
    const auto [gz, iz] = expected_gap_info(plan[z]);
    g += cgame.nu()(static_cast<Eigen::Index>(z)) * gz;
    i += cgame.nu()(static_cast<Eigen::Index>(z)) * iz;
  }
  return ratio_value(g, i);
}

inline void set_mixture(PolicyDecision& d, Index i, Index j, double p) {
  if (i == j || p == 0.0) {
    d.support = {i};
    d.probs = {1.0};
  } else if (p == 1.0) {
    d.support = {j};
    d.probs = {1.0};
  } else {
    d.support = {i, j};
    d.probs = {1.0 - p, p};
  }
  d.ratio = information_ratio(d.gaps, d.infos, d.support, d.probs);
}

}  // namespace detail

/// Contextual IDS: minimizes the joint ratio (sum_z nu_z Delta_z)^2 /
/// (sum_z nu_z I_z) over per-context two-point distributions. Cyclic
/// coordinate descent starting from the conditional IDS plan; each step solves
/// one context's pair and mixing weight exactly with the others held fixed.
inline ContextualPlan contextual_ids(const EstimatorState& state,
                                     const ContextualGame& cgame, double delta,
                                     Index max_sweeps = 200,
                                     double tolerance = 1e-9) {
  ContextualPlan plan;
  for (Index z = 0; z < cgame.size(); ++z) {
    plan.conditionals.push_back(conditional_ids(state, cgame, z, delta));
  }
  double current = detail::joint_ratio(cgame, plan.conditionals);
  plan.sweep_ratios.push_back(current);

  for (Index sweep = 0; sweep < max_sweeps; ++sweep) {
    const double before = current;
    for (Index z = 0; z < cgame.size(); ++z) {
      const double w = cgame.nu()(static_cast<Eigen::Index>(z));
      if (w == 0.0) continue;
      double g_rest = 0.0, i_rest = 0.0;
      for (Index y = 0; y < cgame.size(); ++y) {
        if (y == z) continue;
        const auto [gy, iy] = detail::expected_gap_info(plan.conditionals[y]);
        g_rest += cgame.nu()(static_cast<Eigen::Index>(y)) * gy;
        i_rest += cgame.nu()(static_cast<Eigen::Index>(y)) * iy;
      }
      PolicyDecision& d = plan.conditionals[z];
      const auto n = static_cast<Index>(d.gaps.size());
      double best = current;
      Index bi = 0, bj = 0;
      double bp = 0.0;
      bool improved = false;
      for (Index i = 0; i < n; ++i) {
        const auto ai = static_cast<Eigen::Index>(i);
        for (Index j = i; j < n; ++j) {
          const auto aj = static_cast<Eigen::Index>(j);
          const auto m = detail::best_mixture(d.gaps(ai), d.gaps(aj), d.infos(ai),
                                              d.infos(aj), g_rest, i_rest, w);
          if (m.ratio < best) {
            best = m.ratio;
            bi = i;
            bj = j;
            bp = m.p;
            improved = true;
          }
        }
      }
      if (improved) {
        detail::set_mixture(d, bi, bj, bp);
        current = detail::joint_ratio(cgame, plan.conditionals);
      }
    }
    plan.sweep_ratios.push_back(current);
    if (!(before - current >= tolerance)) break;
  }
  plan.joint_ratio = current;
  plan.no_information = !std::isfinite(current);
  return plan;
}

/// Joint ratio of the plan assembled from conditional IDS decisions.
inline double conditional_joint_ratio(const EstimatorState& state,
                                      const ContextualGame& cgame, double delta) {
  std::vector<PolicyDecision> plan;
  for (Index z = 0; z < cgame.size(); ++z) {
    plan.push_back(conditional_ids(state, cgame, z, delta));
  }
  return detail::joint_ratio(cgame, plan);
}

/// Upper bound on the expected alignment constant: for every context z with
/// nu_z > 0 and every pair in subsets[z], the cheapest observer context z'
/// (nu_{z'} > 0) contributes alignment_upper_{z'}(pair) / nu_{z'}. Returns
/// +inf when some difference is observable in no positive-probability context.
inline double expected_alignment_upper(const ContextualGame& cgame,
                                       const std::vector<std::vector<Index>>& subsets) {
  require(subsets.size() == cgame.size(),
          "expected_alignment_upper: one subset per context required");
  double worst = 0.0;
  for (Index z = 0; z < cgame.size(); ++z) {
    if (cgame.nu()(static_cast<Eigen::Index>(z)) <= 0.0) continue;
    const Game& g = cgame.game(z);
    const auto& sub = subsets[z];
    for (Index a = 0; a < sub.size(); ++a) {
      for (Index b = a + 1; b < sub.size(); ++b) {
        const Vector diff = g.action(sub[a]) - g.action(sub[b]);
        double best = kInf;
        for (Index y = 0; y < cgame.size(); ++y) {
          const double nu_y = cgame.nu()(static_cast<Eigen::Index>(y));
          if (nu_y <= 0.0) continue;
          const Game& obs = cgame.game(y);
          const std::vector<Index> preferred =
              y == z ? std::vector<Index>{sub[a], sub[b]} : std::vector<Index>{};
          const double s = detail::group_l1_bound(obs, obs.all_indices(), preferred, diff);
          if (std::isfinite(s)) best = std::min(best, s * s / nu_y);
        }
        if (!std::isfinite(best)) return kInf;
        worst = std::max(worst, best);
      }
    }
  }
  return worst;
}

/// Pareto actions of every context, the default subsets for the bound above.
inline std::vector<std::vector<Index>> pareto_subsets(const ContextualGame& cgame) {
  std::vector<std::vector<Index>> out;
  for (Index z = 0; z < cgame.size(); ++z) out.push_back(pareto_actions(cgame.game(z)));
  return out;
}

}  // namespace pmids

#endif  // PMIDS_CONTEXTUAL_HPP
