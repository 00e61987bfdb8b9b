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

#ifndef PMIDS_GAME_HPP
#define PMIDS_GAME_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pmids/common.hpp"

namespace pmids {

struct NoiseModel {
  enum class Kind { gaussian, binary_sign };

  Kind kind = Kind::gaussian;
  double sigma = 1.0;

  static NoiseModel gaussian(double sigma) {
    require(sigma >= 0.0 && std::isfinite(sigma),
            "noise: gaussian sigma must be finite and >= 0");
    return {Kind::gaussian, sigma};
  }
  static NoiseModel binary_sign() { return {Kind::binary_sign, 1.0}; }
};

inline double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

/// A finite linear partial monitoring game.
///
/// Action i has reward vector x_i in R^d and observation operator A_i of
/// shape d x m_i; playing it under parameter theta yields the observation
/// A_i^T theta + noise and the (unobserved) reward <x_i, theta>. The
/// constructor enforces ||x_i|| <= 1, ||A_i||_2 <= 1 and diam <= 1.
class Game {
 public:
  Game(std::vector<Vector> actions, std::vector<Matrix> obs_ops,
       NoiseModel noise, std::string name,
       std::vector<std::string> labels = {}, double scale = 1.0)
      : actions_(std::move(actions)),
        ops_(std::move(obs_ops)),
        noise_(noise),
        name_(std::move(name)),
        labels_(std::move(labels)),
        scale_(scale) {
    require(!actions_.empty(), "game: action list is empty");
    require(actions_.size() == ops_.size(),
            "game: need one observation operator per action");
    dim_ = static_cast<Index>(actions_.front().size());
    require(dim_ >= 1, "game: dimension must be >= 1");
    if (labels_.empty()) {
      for (Index i = 0; i < actions_.size(); ++i) {
        labels_.push_back(std::to_string(i));
      }
    }
    require(labels_.size() == actions_.size(), "game: label count mismatch");
    validate();
    x_ = Matrix(static_cast<Eigen::Index>(dim_),
                static_cast<Eigen::Index>(size()));
    for (Index i = 0; i < size(); ++i) x_.col(static_cast<Eigen::Index>(i)) = actions_[i];
  }

  Index dim() const { return dim_; }
  Index size() const { return actions_.size(); }
  const Vector& action(Index i) const { return actions_.at(i); }
  const Matrix& op(Index i) const { return ops_.at(i); }
  Index obs_dim(Index i) const { return static_cast<Index>(ops_.at(i).cols()); }
  Index max_obs_dim() const {
    Index m = 0;
    for (const auto& a : ops_) m = std::max(m, static_cast<Index>(a.cols()));
    return m;
  }
  /// Reward vectors as the columns of a d x |X| matrix.
  const Matrix& action_matrix() const { return x_; }
  const NoiseModel& noise() const { return noise_; }
  const std::string& name() const { return name_; }
  const std::string& label(Index i) const { return labels_.at(i); }
  double scale() const { return scale_; }

  double reward(Index i, const Vector& theta) const {
    return actions_.at(i).dot(theta);
  }

  /// Optimal action for theta, lowest index on ties.
  Index best_action(const Vector& theta) const {
    require(static_cast<Index>(theta.size()) == dim_,
            "game: theta has wrong dimension");
    const Vector r = x_.transpose() * theta;
    Index best = 0;
    for (Index i = 1; i < size(); ++i) {
      if (r(static_cast<Eigen::Index>(i)) > r(static_cast<Eigen::Index>(best))) best = i;
    }
    return best;
  }

  /// Columns of all operators side by side (d x sum m_i).
  Matrix stacked_ops(const std::vector<Index>& subset) const {
    Eigen::Index cols = 0;
    for (Index i : subset) cols += ops_.at(i).cols();
    Matrix out(static_cast<Eigen::Index>(dim_), cols);
    Eigen::Index c = 0;
    for (Index i : subset) {
      out.middleCols(c, ops_[i].cols()) = ops_[i];
      c += ops_[i].cols();
    }
    return out;
  }

  std::vector<Index> all_indices() const {
    std::vector<Index> idx(size());
    for (Index i = 0; i < size(); ++i) idx[i] = i;
    return idx;
  }

 private:
  void validate() const {
    const double bound = 1.0 + tol::kNorm;
    for (Index i = 0; i < actions_.size(); ++i) {
      require(static_cast<Index>(actions_[i].size()) == dim_,
              "game: action " + std::to_string(i) + " has wrong dimension");
      require(static_cast<Index>(ops_[i].rows()) == dim_,
              "game: operator " + std::to_string(i) + " must have d rows");
      require(ops_[i].cols() >= 1,
              "game: operator " + std::to_string(i) + " has no columns");
      require(actions_[i].allFinite() && ops_[i].allFinite(),
              "game: non-finite entries");
      require(actions_[i].norm() <= bound,
              "game: action " + std::to_string(i) + " has norm > 1");
      require(spectral_norm(ops_[i]) <= bound,
              "game: operator " + std::to_string(i) + " has norm > 1");
    }
    for (Index i = 0; i < actions_.size(); ++i) {
      for (Index j = i + 1; j < actions_.size(); ++j) {
        require((actions_[i] - actions_[j]).norm() <= bound,
                "game: action set diameter exceeds 1");
      }
    }
  }

  std::vector<Vector> actions_;
  std::vector<Matrix> ops_;
  NoiseModel noise_;
  std::string name_;
  std::vector<std::string> labels_;
  double scale_ = 1.0;
  Index dim_ = 0;
  Matrix x_;
};

/// A game together with the true parameter.
struct Environment {
  Environment(Game g, Vector th, std::uint64_t seed = 0)
      : game(std::move(g)), theta(std::move(th)), rng_seed(seed) {
    require(static_cast<Index>(theta.size()) == game.dim(),
            "environment: theta has wrong dimension");
    require(theta.norm() <= 1.0 + tol::kNorm, "environment: ||theta|| > 1");
  }

  Game game;
  Vector theta;
  std::uint64_t rng_seed;
};

/// Draws A_i^T theta + noise.
template <class Rng>
Vector sample_observation(const Environment& env, Index action, Rng& rng) {
  require(action < env.game.size(), "sample_observation: invalid action");
  const Matrix& a = env.game.op(action);
  Vector mean = a.transpose() * env.theta;
  const NoiseModel& noise = env.game.noise();
  if (noise.kind == NoiseModel::Kind::gaussian) {
    if (noise.sigma == 0.0) return mean;
    std::normal_distribution<double> normal(0.0, noise.sigma);
    for (Eigen::Index k = 0; k < mean.size(); ++k) mean(k) += normal(rng);
    return mean;
  }
  require(mean.size() == 1,
          "sample_observation: binary-sign noise needs scalar observations");
  const double mu = mean(0);
  if (std::abs(mu) > 1.0 + 1e-9) {
    throw InvalidArgument(
        "sample_observation: binary-sign mean outside [-1, 1]");
  }
  const double p_plus = std::clamp((1.0 + mu) / 2.0, 0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector out(1);
  out(0) = unif(rng) < p_plus ? 1.0 : -1.0;
  return out;
}

// ---------------------------------------------------------------------------
// Presets

enum class PresetKind {
  bandit,
  full_info,
  dueling_avg,
  transductive,
  batch,
  laser,
  zero_info,
  circle,
  custom,
};

enum class LaserVariant { invasive, transductive };

/// Parameters for one of the built-in game families. Which fields are read
/// depends on `kind`; `actions` doubles as the ground set for the dueling and
/// batch games.
struct PresetSpec {
  PresetKind kind = PresetKind::bandit;
  std::vector<Vector> actions;
  std::vector<Vector> explore_set;
  std::vector<Vector> target_set;
  std::vector<Matrix> operators;
  Index batch_size = 1;
  Index grid_m = 5;
  LaserVariant laser_variant = LaserVariant::invasive;
  Index num_points = 0;
  NoiseModel noise = NoiseModel::gaussian(1.0);
};

inline const char* preset_name(PresetKind kind) {
  switch (kind) {
    case PresetKind::bandit: return "bandit";
    case PresetKind::full_info: return "full_info";
    case PresetKind::dueling_avg: return "dueling_avg";
    case PresetKind::transductive: return "transductive";
    case PresetKind::batch: return "batch";
    case PresetKind::laser: return "laser";
    case PresetKind::zero_info: return "zero_info";
    case PresetKind::circle: return "circle";
    case PresetKind::custom: return "custom";
  }
  return "unknown";
}

namespace laser {

inline constexpr Index kPositionsPerSide = 3;
inline constexpr Index kNumPositions = kPositionsPerSide * kPositionsPerSide;
inline constexpr Index kFeatureSide = 5;
inline constexpr Index kFeatureDim = kFeatureSide * kFeatureSide;
inline constexpr Index kQuadratureSide = 5;
inline constexpr double kLengthscale = 1.0;

/// Radial-basis features with centers on a 5x5 grid over [-2, 2]^2.
inline Vector features(double z1, double z2) {
  Vector phi(static_cast<Eigen::Index>(kFeatureDim));
  Eigen::Index k = 0;
  for (Index a = 0; a < kFeatureSide; ++a) {
    for (Index b = 0; b < kFeatureSide; ++b) {
      const double c1 = -2.0 + static_cast<double>(a);
      const double c2 = -2.0 + static_cast<double>(b);
      const double r2 = (z1 - c1) * (z1 - c1) + (z2 - c2) * (z2 - c2);
      phi(k++) = std::exp(-r2 / (2.0 * kLengthscale * kLengthscale));
    }
  }
  return phi;
}

inline double intensity(double z1, double z2) {
  return std::exp(-((z1 - 0.5) * (z1 - 0.5) + (z2 - 0.5) * (z2 - 0.5)));
}

/// Shift of the target for position index p (row-major over {-1,0,1}^2).
inline std::pair<double, double> position(Index p) {
  return {static_cast<double>(p / kPositionsPerSide) - 1.0,
          static_cast<double>(p % kPositionsPerSide) - 1.0};
}

/// Midpoint grid of side n over the unit square anchored at (x1, x2).
inline std::vector<std::pair<double, double>> square_grid(double x1, double x2,
                                                          Index n) {
  std::vector<std::pair<double, double>> pts;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      pts.emplace_back(x1 + (static_cast<double>(i) + 0.5) / static_cast<double>(n),
                       x2 + (static_cast<double>(j) + 0.5) / static_cast<double>(n));
    }
  }
  return pts;
}

/// Parameter whose feature expansion approximates the intensity profile,
/// normalized to unit norm. Ridge fit (lambda = 0.1) on a dense grid over
/// [-1, 2]^2.
inline Vector truth() {
  const Index side = 31;
  Matrix phi(static_cast<Eigen::Index>(kFeatureDim),
             static_cast<Eigen::Index>(side * side));
  Vector f(static_cast<Eigen::Index>(side * side));
  Eigen::Index k = 0;
  for (Index i = 0; i < side; ++i) {
    for (Index j = 0; j < side; ++j) {
      const double z1 = -1.0 + 3.0 * static_cast<double>(i) / static_cast<double>(side - 1);
      const double z2 = -1.0 + 3.0 * static_cast<double>(j) / static_cast<double>(side - 1);
      phi.col(k) = features(z1, z2);
      f(k) = intensity(z1, z2);
      ++k;
    }
  }
  const Matrix gram = phi * phi.transpose() +
                      0.1 * Matrix::Identity(phi.rows(), phi.rows());
  Vector theta = gram.ldlt().solve(phi * f);
  return theta / theta.norm();
}

}  // namespace laser

namespace detail {

inline bool same_vector(const Vector& a, const Vector& b) {
  return a.size() == b.size() && (a - b).norm() <= 1e-12;
}

inline Matrix column(const Vector& v) {
  Matrix m(v.size(), 1);
  m.col(0) = v;
  return m;
}

inline std::string format_scale(double s) {
  std::ostringstream os;
  os.precision(6);
  os << s;
  return os.str();
}

// Divides every action and operator by max(1, max ||x||, diam, max ||A||).
inline Game rescaled(const std::string& name, std::vector<Vector> actions,
                     std::vector<Matrix> ops, NoiseModel noise,
                     std::vector<std::string> labels) {
  double worst = 1.0;
  for (const auto& x : actions) worst = std::max(worst, x.norm());
  for (const auto& a : ops) worst = std::max(worst, spectral_norm(a));
  for (Index i = 0; i < actions.size(); ++i) {
    for (Index j = i + 1; j < actions.size(); ++j) {
      worst = std::max(worst, (actions[i] - actions[j]).norm());
    }
  }
  const double s = 1.0 / worst;
  if (s != 1.0) {
    for (auto& x : actions) x *= s;
    for (auto& a : ops) a *= s;
  }
  std::string label = name;
  if (s != 1.0) label += " (scale=" + format_scale(s) + ")";
  return Game(std::move(actions), std::move(ops), noise, label,
              std::move(labels), s);
}

inline void require_nonempty(const std::vector<Vector>& v, const char* what) {
  require(!v.empty(), std::string("build_game: empty ") + what);
  for (const auto& x : v) {
    require(x.size() == v.front().size() && x.size() >= 1,
            std::string("build_game: inconsistent dimensions in ") + what);
  }
}

}  // namespace detail

/// Index of the dueling action (i, j) in a game built from a ground set of
/// size k.
inline Index dueling_index(Index k, Index i, Index j) { return i * k + j; }

inline Game build_game(const PresetSpec& spec) {
  using detail::column;
  std::vector<Vector> xs;
  std::vector<Matrix> ops;
  std::vector<std::string> labels;
  const char* name = preset_name(spec.kind);

  switch (spec.kind) {
    case PresetKind::bandit:
    case PresetKind::full_info:
    case PresetKind::zero_info: {
      detail::require_nonempty(spec.actions, "action list");
      const auto d = spec.actions.front().size();
      for (const auto& x : spec.actions) {
        xs.push_back(x);
        if (spec.kind == PresetKind::bandit) {
          ops.push_back(column(x));
        } else if (spec.kind == PresetKind::full_info) {
          ops.push_back(Matrix::Identity(d, d));
        } else {
          ops.push_back(Matrix::Zero(d, 1));
        }
      }
      break;
    }
    case PresetKind::custom: {
      detail::require_nonempty(spec.actions, "action list");
      require(spec.operators.size() == spec.actions.size(),
              "build_game: custom preset needs one operator per action");
      xs = spec.actions;
      ops = spec.operators;
      break;
    }
    case PresetKind::circle: {
      require(spec.num_points >= 1, "build_game: circle needs num_points >= 1");
      for (Index k = 0; k < spec.num_points; ++k) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(spec.num_points);
        Vector x(2);
        x << std::cos(a), std::sin(a);
        xs.push_back(x);
        ops.push_back(column(x));
      }
      break;
    }
    case PresetKind::dueling_avg: {
      detail::require_nonempty(spec.actions, "ground action list");
      const Index k = spec.actions.size();
      for (Index i = 0; i < k; ++i) {
        for (Index j = 0; j < k; ++j) {
          xs.push_back((spec.actions[i] + spec.actions[j]) / 2.0);
          ops.push_back(column(spec.actions[i] - spec.actions[j]));
          labels.push_back("(" + std::to_string(i) + "," + std::to_string(j) + ")");
        }
      }
      break;
    }
    case PresetKind::batch: {
      detail::require_nonempty(spec.actions, "ground action list");
      require(spec.batch_size >= 1, "build_game: batch size B must be >= 1");
      const Index k = spec.actions.size();
      const Index b = spec.batch_size;
      const auto d = spec.actions.front().size();
      std::vector<Index> tuple(b, 0);
      for (;;) {
        Vector reward = Vector::Zero(d);
        Matrix op(d, static_cast<Eigen::Index>(b));
        std::string label = "(";
        for (Index s = 0; s < b; ++s) {
          reward += spec.actions[tuple[s]];
          op.col(static_cast<Eigen::Index>(s)) = spec.actions[tuple[s]];
          label += (s ? "," : "") + std::to_string(tuple[s]);
        }
        xs.push_back(reward);
        ops.push_back(op);
        labels.push_back(label + ")");
        Index pos = b;
        while (pos > 0 && ++tuple[pos - 1] == k) tuple[--pos] = 0;
        if (pos == 0) break;
      }
      break;
    }
    case PresetKind::transductive: {
      detail::require_nonempty(spec.explore_set, "explore set");
      detail::require_nonempty(spec.target_set, "target set");
      require(spec.explore_set.front().size() == spec.target_set.front().size(),
              "build_game: explore and target sets differ in dimension");
      const auto d = spec.explore_set.front().size();
      auto in = [](const std::vector<Vector>& set, const Vector& x) {
        return std::any_of(set.begin(), set.end(), [&](const Vector& y) {
          return detail::same_vector(x, y);
        });
      };
      for (const auto& s : spec.explore_set) {
        const bool target = in(spec.target_set, s);
        xs.push_back(target ? s : Vector::Zero(d));
        ops.push_back(column(s));
        labels.push_back(target ? "explore+target" : "explore");
      }
      for (const auto& v : spec.target_set) {
        if (in(spec.explore_set, v)) continue;
        xs.push_back(v);
        ops.push_back(Matrix::Zero(d, 1));
        labels.push_back("target");
      }
      break;
    }
    case PresetKind::laser: {
      require(spec.grid_m >= 1, "build_game: laser grid_m must be >= 1");
      const auto d = static_cast<Eigen::Index>(laser::kFeatureDim);
      std::vector<Vector> rewards;
      std::vector<Matrix> screens;
      for (Index p = 0; p < laser::kNumPositions; ++p) {
        const auto [x1, x2] = laser::position(p);
        Vector r = Vector::Zero(d);
        const auto quad = laser::square_grid(x1, x2, laser::kQuadratureSide);
        for (const auto& [z1, z2] : quad) r += laser::features(z1, z2);
        rewards.push_back(r / static_cast<double>(quad.size()));
        const auto grid = laser::square_grid(x1 - 0.5, x2 - 0.5, spec.grid_m);
        Matrix screen(d, static_cast<Eigen::Index>(grid.size()));
        for (Index g = 0; g < grid.size(); ++g) {
          screen.col(static_cast<Eigen::Index>(g)) =
              laser::features(grid[g].first, grid[g].second);
        }
        screens.push_back(screen);
      }
      auto pos_label = [](Index p) {
        const auto [x1, x2] = laser::position(p);
        return "(" + std::to_string(static_cast<int>(x1)) + "," +
               std::to_string(static_cast<int>(x2)) + ")";
      };
      for (Index p = 0; p < laser::kNumPositions; ++p) {
        xs.push_back(rewards[p]);
        ops.push_back(spec.laser_variant == LaserVariant::invasive
                          ? column(rewards[p])
                          : Matrix::Zero(d, 1));
        labels.push_back("intensity" + pos_label(p));
      }
      for (Index p = 0; p < laser::kNumPositions; ++p) {
        xs.push_back(Vector::Zero(d));
        ops.push_back(screens[p]);
        labels.push_back("screen" + pos_label(p));
      }
      break;
    }
  }
  return detail::rescaled(name, std::move(xs), std::move(ops), spec.noise,
                          std::move(labels));
}

}  // namespace pmids

#endif  // PMIDS_GAME_HPP
