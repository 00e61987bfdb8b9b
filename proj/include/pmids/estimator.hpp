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

#ifndef PMIDS_ESTIMATOR_HPP
#define PMIDS_ESTIMATOR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "pmids/common.hpp"

namespace pmids {

/// log det of a symmetric positive-definite matrix via Cholesky.
inline double logdet_spd(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("logdet_spd: matrix is not positive definite");
  }
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

/// Regularized least-squares state: V = I + sum A_s A_s^T, b = sum A_s a_s,
/// theta_hat = V^{-1} b.
///
/// The Cholesky factor of V is recomputed from scratch on every update
/// (O(d^3) per round).
class EstimatorState {
 public:
  explicit EstimatorState(Index d) {
    require(d >= 1, "estimator: dimension must be >= 1");
    const auto n = static_cast<Eigen::Index>(d);
    v_ = Matrix::Identity(n, n);
    b_ = Vector::Zero(n);
    theta_hat_ = Vector::Zero(n);
    v_inv_ = Matrix::Identity(n, n);
    llt_.compute(v_);
  }

  Index dim() const { return static_cast<Index>(b_.size()); }
  const Matrix& gram() const { return v_; }
  const Matrix& gram_inverse() const { return v_inv_; }
  const Vector& b() const { return b_; }
  const Vector& theta_hat() const { return theta_hat_; }
  std::uint64_t rounds() const { return t_; }
  double logdet() const { return logdet_; }

  /// V <- V + A A^T, b <- b + A obs.
  void update(const Matrix& a, const Vector& obs) {
    require(static_cast<Index>(a.rows()) == dim(),
            "estimator: operator must have d rows");
    require(a.cols() == obs.size(),
            "estimator: observation length must match operator columns");
    ++t_;
    if (a.isZero(0.0)) return;
    v_.noalias() += a * a.transpose();
    b_.noalias() += a * obs;
    refresh();
  }

  /// sqrt(log det V + 2 log(1/delta)) + 1.
  double beta_radius(double delta) const {
    require(delta > 0.0 && delta <= 1.0, "beta_radius: delta must be in (0, 1]");
    return std::sqrt(std::max(0.0, logdet_ + 2.0 * std::log(1.0 / delta))) + 1.0;
  }

  /// ||w||_{V^{-1}}.
  double weighted_norm(const Vector& w) const {
    require(static_cast<Index>(w.size()) == dim(),
            "weighted_norm: vector has wrong dimension");
    return std::sqrt(std::max(0.0, w.dot(llt_.solve(w))));
  }

  Vector solve(const Vector& w) const { return llt_.solve(w); }

  /// log det V_t - log det V_0; V_0 = I so this is log det V_t.
  double total_info_gain() const { return logdet_; }

 private:
  void refresh() {
    llt_.compute(v_);
    if (llt_.info() != Eigen::Success) {
      throw NumericalError("estimator: Gram matrix lost positive definiteness");
    }
    theta_hat_ = llt_.solve(b_);
    v_inv_ = llt_.solve(Matrix::Identity(v_.rows(), v_.cols()));
    logdet_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  }

  Matrix v_;
  Vector b_;
  Vector theta_hat_;
  Matrix v_inv_;
  Eigen::LLT<Matrix> llt_;
  std::uint64_t t_ = 0;
  double logdet_ = 0.0;
};

}  // namespace pmids

#endif  // PMIDS_ESTIMATOR_HPP
