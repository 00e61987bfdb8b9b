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

#ifndef PMIDS_KERNEL_HPP
#define PMIDS_KERNEL_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "pmids/common.hpp"
#include "pmids/estimator.hpp"
#include "pmids/game.hpp"
#include "pmids/policy.hpp"

// Kernelized partial monitoring. The unknown function f lives in the RKHS of
// k; every reward and every observation coordinate is a bounded linear
// functional of f, written as a finite combination of point evaluations and
// first partial derivatives. Covariances between functionals follow from k and
// its derivatives, which covers value, dueling and gradient feedback with one
// code path.

namespace pmids {

struct KernelSpec {
  enum class Kind { linear, rbf };
  Kind kind = Kind::rbf;
  double lengthscale = 1.0;
  Index dim = 1;

  static KernelSpec linear(Index d) { return {Kind::linear, 1.0, d}; }
  static KernelSpec rbf(Index d, double lengthscale) {
    require(lengthscale > 0.0, "kernel: lengthscale must be > 0");
    return {Kind::rbf, lengthscale, d};
  }

  double operator()(const Vector& p, const Vector& q) const { return eval(p, -1, q, -1); }

  /// Derivative of k(p, q): dp < 0 means no derivative in p, otherwise the
  /// partial derivative with respect to p_dp; likewise dq for q.
  double eval(const Vector& p, int dp, const Vector& q, int dq) const {
    if (kind == Kind::linear) {
      if (dp < 0 && dq < 0) return p.dot(q);
      if (dp >= 0 && dq < 0) return q(dp);
      if (dp < 0 && dq >= 0) return p(dq);
      return dp == dq ? 1.0 : 0.0;
    }
    const double l2 = lengthscale * lengthscale;
    const Vector diff = p - q;
    const double k = std::exp(-diff.squaredNorm() / (2.0 * l2));
    if (dp < 0 && dq < 0) return k;
    if (dp >= 0 && dq < 0) return -diff(dp) / l2 * k;
    if (dp < 0 && dq >= 0) return diff(dq) / l2 * k;
    const double delta = dp == dq ? 1.0 : 0.0;
    return (delta / l2 - diff(dp) * diff(dq) / (l2 * l2)) * k;
  }
};

/// coef * (d/dz_deriv)^{[deriv >= 0]} f(point).
struct Term {
  double coef = 1.0;
  Vector point;
  int deriv = -1;
};

using Functional = std::vector<Term>;

inline Functional value_at(const Vector& x, double coef = 1.0) { return {{coef, x, -1}}; }

inline Functional partial_at(const Vector& x, int i) { return {{1.0, x, i}}; }

/// f(x) - f(x').
inline Functional dueling_functional(const Vector& x, const Vector& xp) {
  return {{1.0, x, -1}, {-1.0, xp, -1}};
}

/// (f(x) + f(x')) / 2.
inline Functional average_functional(const Vector& x, const Vector& xp) {
  return {{0.5, x, -1}, {0.5, xp, -1}};
}

/// Covariance <L1 k, L2 k> of two functionals under the kernel.
inline double functional_cov(const KernelSpec& k, const Functional& a, const Functional& b) {
  double s = 0.0;
  for (const auto& ta : a) {
    for (const auto& tb : b) s += ta.coef * tb.coef * k.eval(ta.point, ta.deriv, tb.point, tb.deriv);
  }
  return s;
}

/// An action: reward functional plus one functional per observation coordinate.
struct KernelAction {
  Functional reward;
  std::vector<Functional> observations;
  std::string label;
};

/// f = sum_i alpha_i k(c_i, .).
struct KernelFunction {
  std::vector<Vector> centers;
  Vector alpha;

  double apply(const KernelSpec& k, const Functional& l) const {
    double s = 0.0;
    for (Index i = 0; i < centers.size(); ++i) {
      s += alpha(static_cast<Eigen::Index>(i)) * functional_cov(k, value_at(centers[i]), l);
    }
    return s;
  }

  double rkhs_norm(const KernelSpec& k) const {
    const auto n = static_cast<Eigen::Index>(centers.size());
    Matrix g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        g(i, j) = k(centers[static_cast<Index>(i)], centers[static_cast<Index>(j)]);
      }
    }
    return std::sqrt(std::max(0.0, alpha.dot(g * alpha)));
  }
};

/// Random element of the RKHS with unit norm.
template <class Rng>
KernelFunction random_kernel_function(const KernelSpec& k, Index num_centers, double box,
                                      Rng& rng) {
  require(num_centers >= 1, "random_kernel_function: need at least one center");
  std::uniform_real_distribution<double> unif(-box, box);
  std::normal_distribution<double> normal(0.0, 1.0);
  KernelFunction f;
  f.alpha = Vector(static_cast<Eigen::Index>(num_centers));
  for (Index i = 0; i < num_centers; ++i) {
    Vector c(static_cast<Eigen::Index>(k.dim));
    for (Index j = 0; j < k.dim; ++j) c(static_cast<Eigen::Index>(j)) = unif(rng);
    f.centers.push_back(c);
    f.alpha(static_cast<Eigen::Index>(i)) = normal(rng);
  }
  const double n = f.rkhs_norm(k);
  if (n > 0.0) f.alpha /= n;
  return f;
}

struct KernelGame {
  KernelSpec kernel;
  std::vector<KernelAction> actions;
  NoiseModel noise = NoiseModel::gaussian(1.0);
  std::string name;

  Index size() const { return actions.size(); }

  Index best_action(const KernelFunction& f) const {
    Index best = 0;
    double bv = -kInf;
    for (Index i = 0; i < size(); ++i) {
      const double v = f.apply(kernel, actions[i].reward);
      if (v > bv) {
        bv = v;
        best = i;
      }
    }
    return best;
  }
};

enum class KernelFeedback { value, gradient, value_gradient, dueling };

inline const char* feedback_name(KernelFeedback f) {
  switch (f) {
    case KernelFeedback::value: return "value";
    case KernelFeedback::gradient: return "gradient";
    case KernelFeedback::value_gradient: return "value_gradient";
    case KernelFeedback::dueling: return "dueling";
  }
  return "unknown";
}

/// Game over a ground set of points. Dueling feedback enumerates all ordered
/// pairs with average reward; the other kinds reward f(x).
inline KernelGame build_kernel_game(const KernelSpec& k, const std::vector<Vector>& ground,
                                    KernelFeedback feedback, NoiseModel noise) {
  require(!ground.empty(), "kernel game: ground set is empty");
  for (const auto& x : ground) {
    require(static_cast<Index>(x.size()) == k.dim, "kernel game: point has wrong dimension");
  }
  KernelGame g;
  g.kernel = k;
  g.noise = noise;
  g.name = std::string("kernel_") + feedback_name(feedback);
  if (feedback == KernelFeedback::dueling) {
    for (Index i = 0; i < ground.size(); ++i) {
      for (Index j = 0; j < ground.size(); ++j) {
        KernelAction a;
        a.reward = average_functional(ground[i], ground[j]);
        if (i != j) a.observations.push_back(dueling_functional(ground[i], ground[j]));
        a.label = "(" + std::to_string(i) + "," + std::to_string(j) + ")";
        g.actions.push_back(std::move(a));
      }
    }
    return g;
  }
  for (Index i = 0; i < ground.size(); ++i) {
    KernelAction a;
    a.reward = value_at(ground[i]);
    if (feedback == KernelFeedback::value || feedback == KernelFeedback::value_gradient) {
      a.observations.push_back(value_at(ground[i]));
    }
    if (feedback == KernelFeedback::gradient || feedback == KernelFeedback::value_gradient) {
      for (Index j = 0; j < k.dim; ++j) {
        a.observations.push_back(partial_at(ground[i], static_cast<int>(j)));
      }
    }
    a.label = std::to_string(i);
    g.actions.push_back(std::move(a));
  }
  return g;
}

/// Kernel game whose functionals reproduce a linear game under the linear
/// kernel: rewards are evaluations at x_i, observations at the columns of A_i.
inline KernelGame linear_as_kernel_game(const Game& game) {
  KernelGame g;
  g.kernel = KernelSpec::linear(game.dim());
  g.noise = game.noise();
  g.name = game.name() + " (linear kernel)";
  for (Index i = 0; i < game.size(); ++i) {
    KernelAction a;
    a.reward = value_at(game.action(i));
    const Matrix& op = game.op(i);
    if (!op.isZero(0.0)) {
      for (Eigen::Index c = 0; c < op.cols(); ++c) a.observations.push_back(value_at(op.col(c)));
    }
    a.label = game.label(i);
    g.actions.push_back(std::move(a));
  }
  return g;
}

/// History of scalar observations with the cached factorization of K_t + I.
class KernelData {
 public:
  static constexpr Index kMaxObservations = 2000;

  explicit KernelData(KernelSpec k) : kernel_(k) {}

  const KernelSpec& kernel() const { return kernel_; }
  Index size() const { return history_.size(); }
  const std::vector<Functional>& history() const { return history_; }
  const Vector& observations() const { return a_; }
  const Matrix& gram() const { return gram_; }

  void update(const std::vector<Functional>& obs_functionals, const Vector& obs) {
    require(static_cast<Index>(obs.size()) == obs_functionals.size(),
            "kernel data: observation length mismatch");
    if (obs_functionals.empty()) return;
    require(history_.size() + obs_functionals.size() <= kMaxObservations,
            "kernel data: history exceeds the observation cap");
    const auto old_n = static_cast<Eigen::Index>(history_.size());
    for (const auto& f : obs_functionals) history_.push_back(f);
    const auto n = static_cast<Eigen::Index>(history_.size());
    Matrix g(n, n);
    g.topLeftCorner(old_n, old_n) = gram_;
    for (Eigen::Index i = old_n; i < n; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double v = functional_cov(kernel_, history_[static_cast<Index>(i)],
                                        history_[static_cast<Index>(j)]);
        g(i, j) = v;
        g(j, i) = v;
      }
    }
    gram_ = std::move(g);
    Vector a(n);
    a.head(old_n) = a_;
    a.tail(n - old_n) = obs;
    a_ = std::move(a);
    llt_.compute(gram_ + Matrix::Identity(n, n));
    if (llt_.info() != Eigen::Success) {
      throw NumericalError("kernel data: K + I is not positive definite");
    }
    alpha_ = llt_.solve(a_);
    logdet_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  }

  /// log det(K_t + I).
  double logdet() const { return logdet_; }

  /// Column of covariances between the history and a functional.
  Vector cross(const Functional& l) const {
    Vector v(static_cast<Eigen::Index>(history_.size()));
    for (Index i = 0; i < history_.size(); ++i) {
      v(static_cast<Eigen::Index>(i)) = functional_cov(kernel_, history_[i], l);
    }
    return v;
  }

  double mean(const Functional& l) const {
    if (history_.empty()) return 0.0;
    return cross(l).dot(alpha_);
  }

  /// Posterior covariance matrix of a list of functionals.
  Matrix covariance(const std::vector<Functional>& ls) const {
    const auto n = static_cast<Eigen::Index>(ls.size());
    Matrix c(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        c(i, j) = c(j, i) = functional_cov(kernel_, ls[static_cast<Index>(i)],
                                           ls[static_cast<Index>(j)]);
      }
    }
    if (history_.empty() || n == 0) return c;
    Matrix kt(static_cast<Eigen::Index>(history_.size()), n);
    for (Eigen::Index j = 0; j < n; ++j) kt.col(j) = cross(ls[static_cast<Index>(j)]);
    c.noalias() -= kt.transpose() * llt_.solve(kt);
    return 0.5 * (c + c.transpose());
  }

  std::vector<double> means(const std::vector<Functional>& ls) const {
    std::vector<double> out;
    for (const auto& l : ls) out.push_back(mean(l));
    return out;
  }

 private:
  KernelSpec kernel_;
  std::vector<Functional> history_;
  Matrix gram_ = Matrix(0, 0);
  Vector a_ = Vector(0);
  Vector alpha_ = Vector(0);
  Eigen::LLT<Matrix> llt_;
  double logdet_ = 0.0;
};

namespace detail {

inline double checked_variance(double v) {
  if (v < -tol::kVariance) {
    throw NumericalError("kernel: posterior variance is negative beyond tolerance");
  }
  return std::max(0.0, v);
}

}  // namespace detail

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;
};

inline Posterior posterior(const KernelData& data, const Functional& l) {
  const Matrix c = data.covariance({l});
  return {data.mean(l), detail::checked_variance(c(0, 0))};
}

/// Posterior covariance k_t(l1, l2).
inline double posterior_cov(const KernelData& data, const Functional& l1, const Functional& l2) {
  return data.covariance({l1, l2})(0, 1);
}

/// sqrt(log det(K_t + I) + 2 log(1/delta)) + 1.
inline double kernel_beta(const KernelData& data, double delta) {
  require(delta > 0.0 && delta <= 1.0, "kernel_beta: delta must be in (0, 1]");
  return std::sqrt(std::max(0.0, data.logdet() + 2.0 * std::log(1.0 / delta))) + 1.0;
}

/// Gap estimates of every action, truncated at 1.
inline Vector kernel_gaps(const KernelData& data, const KernelGame& game, double beta_sqrt) {
  std::vector<Functional> rewards;
  for (const auto& a : game.actions) rewards.push_back(a.reward);
  const auto mu = data.means(rewards);
  const Matrix c = data.covariance(rewards);
  const Index n = game.size();
  Vector out(static_cast<Eigen::Index>(n));
  for (Index x = 0; x < n; ++x) {
    const auto ex = static_cast<Eigen::Index>(x);
    double best = 0.0;
    for (Index y = 0; y < n; ++y) {
      if (y == x) continue;
      const auto ey = static_cast<Eigen::Index>(y);
      const double var = detail::checked_variance(c(ex, ex) + c(ey, ey) - 2.0 * c(ex, ey));
      best = std::max(best, mu[y] - mu[x] + beta_sqrt * std::sqrt(var));
    }
    out(ex) = std::min(1.0, best);
  }
  return out;
}

inline double kernel_gap(const KernelData& data, const KernelGame& game, double beta_sqrt,
                         Index x) {
  require(x < game.size(), "kernel_gap: invalid action index");
  return kernel_gaps(data, game, beta_sqrt)(static_cast<Eigen::Index>(x));
}

/// log det(I_m + M_xx - M_t(x)^T (K_t + I)^{-1} M_t(x)).
inline double kernel_info_gain(const KernelData& data, const KernelAction& action) {
  if (action.observations.empty()) return 0.0;
  const Matrix c = data.covariance(action.observations);
  const auto m = c.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(c, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -tol::kVariance) {
    throw NumericalError("kernel_info_gain: posterior covariance is not PSD");
  }
  const double v = logdet_spd(Matrix::Identity(m, m) + c);
  if (v < -tol::kVariance) throw NumericalError("kernel_info_gain: negative information");
  return std::max(0.0, v);
}

/// Covariance of the dueling observations of (x, x') and (z, z').
inline double dueling_blocks(const KernelSpec& k, const Vector& x, const Vector& xp,
                             const Vector& z, const Vector& zp) {
  return k(x, z) - k(x, zp) - k(xp, z) + k(xp, zp);
}

struct GradientBlocks {
  /// (A_x A_y^*)_{ij} = d/dy_i d/dx_j k(x, y).
  Matrix m;
  /// (k_x A_y^*)_i = d/dy_i k(x, y).
  Vector cross;
};

inline GradientBlocks gradient_blocks(const KernelSpec& k, const Vector& x, const Vector& y) {
  require(k.kind == KernelSpec::Kind::rbf, "gradient_blocks: requires the rbf kernel");
  const auto d = x.size();
  const double l2 = k.lengthscale * k.lengthscale;
  const Vector diff = x - y;
  const double kv = k(x, y);
  GradientBlocks b;
  b.m = (Matrix::Identity(d, d) / l2 - diff * diff.transpose() / (l2 * l2)) * kv;
  b.cross = diff / l2 * kv;
  return b;
}

/// Decision rule for kernel games. Supports ids_full, ids_deterministic, ucb,
/// greedy and uniform.
inline PolicyDecision kernel_decide(PolicyKind kind, const KernelData& data,
                                    const KernelGame& game, double delta) {
  const double beta = kernel_beta(data, delta);
  Vector gaps = kernel_gaps(data, game, beta);
  Vector infos(static_cast<Eigen::Index>(game.size()));
  for (Index i = 0; i < game.size(); ++i) {
    infos(static_cast<Eigen::Index>(i)) = kernel_info_gain(data, game.actions[i]);
  }
  switch (kind) {
    case PolicyKind::ids_full:
      return ids_decision(std::move(gaps), std::move(infos));
    case PolicyKind::ids_deterministic: {
      PolicyDecision d;
      d.gaps = std::move(gaps);
      d.infos = std::move(infos);
      Index best = 0;
      double br = kInf;
      for (Index i = 0; i < game.size(); ++i) {
        const auto e = static_cast<Eigen::Index>(i);
        const double r = ratio_value(d.gaps(e), d.infos(e));
        if (r < br) {
          br = r;
          best = i;
        }
      }
      if (!std::isfinite(br)) {
        best = detail::argmin_lowest(d.gaps);
        d.fallback = true;
      }
      d.support = {best};
      d.probs = {1.0};
      d.ratio = information_ratio(d.gaps, d.infos, d.support, d.probs);
      return d;
    }
    case PolicyKind::ucb:
    case PolicyKind::greedy: {
      PolicyDecision d;
      d.gaps = std::move(gaps);
      d.infos = std::move(infos);
      std::vector<Functional> rewards;
      for (const auto& a : game.actions) rewards.push_back(a.reward);
      const auto mu = data.means(rewards);
      const Matrix c = data.covariance(rewards);
      Index best = 0;
      double bv = -kInf;
      for (Index i = 0; i < game.size(); ++i) {
        const auto e = static_cast<Eigen::Index>(i);
        double v = mu[i];
        if (kind == PolicyKind::ucb) v += beta * std::sqrt(detail::checked_variance(c(e, e)));
        if (v > bv) {
          bv = v;
          best = i;
        }
      }
      d.support = {best};
      d.probs = {1.0};
      d.ratio = information_ratio(d.gaps, d.infos, d.support, d.probs);
      return d;
    }
    case PolicyKind::uniform: {
      PolicyDecision d;
      d.gaps = std::move(gaps);
      d.infos = std::move(infos);
      for (Index i = 0; i < game.size(); ++i) {
        d.support.push_back(i);
        d.probs.push_back(1.0 / static_cast<double>(game.size()));
      }
      d.ratio = information_ratio(d.gaps, d.infos, d.support, d.probs);
      return d;
    }
    case PolicyKind::ids_directed:
      break;
  }
  throw InvalidArgument(std::string("kernel_decide: unsupported policy ") + policy_name(kind));
}

/// Noisy observation of every observation functional of an action.
template <class Rng>
Vector sample_kernel_observation(const KernelGame& game, const KernelFunction& f, Index action,
                                 Rng& rng) {
  require(action < game.size(), "sample_kernel_observation: invalid action");
  const auto& obs = game.actions[action].observations;
  Vector out(static_cast<Eigen::Index>(obs.size()));
  for (Index i = 0; i < obs.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = f.apply(game.kernel, obs[i]);
  }
  if (game.noise.kind == NoiseModel::Kind::gaussian) {
    if (game.noise.sigma > 0.0) {
      std::normal_distribution<double> normal(0.0, game.noise.sigma);
      for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += normal(rng);
    }
    return out;
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double mu = out(i);
    if (std::abs(mu) > 1.0 + 1e-9) {
      throw InvalidArgument("sample_kernel_observation: binary-sign mean outside [-1, 1]");
    }
    out(i) = unif(rng) < (1.0 + mu) / 2.0 ? 1.0 : -1.0;
  }
  return out;
}

}  // namespace pmids

#endif  // PMIDS_KERNEL_HPP
