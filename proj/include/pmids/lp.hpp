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

#ifndef PMIDS_LP_HPP
#define PMIDS_LP_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "pmids/common.hpp"

/// Small dense linear programming solver.
///
/// Two-phase tableau simplex with Bland's anti-cycling rule. Intended for the
/// geometric tests in the classifier, where problems have at most a few
/// hundred variables; it makes no attempt at sparse or large-scale efficiency.
namespace pmids::lp {

enum class Status { optimal, infeasible, unbounded };
enum class Sense { le, ge, eq };

struct Result {
  Status status = Status::infeasible;
  Vector x;
  double objective = 0.0;
};

class Problem {
 public:
  explicit Problem(Index num_vars)
      : lo_(Vector::Zero(static_cast<Eigen::Index>(num_vars))),
        hi_(Vector::Constant(static_cast<Eigen::Index>(num_vars), kInf)),
        c_(Vector::Zero(static_cast<Eigen::Index>(num_vars))) {}

  Index num_vars() const { return static_cast<Index>(lo_.size()); }

  /// Lower bounds must be finite; upper bounds may be +inf.
  void set_bounds(Index var, double lo, double hi) {
    require(var < num_vars(), "lp: variable index out of range");
    require(std::isfinite(lo) && lo <= hi, "lp: invalid bounds");
    lo_(static_cast<Eigen::Index>(var)) = lo;
    hi_(static_cast<Eigen::Index>(var)) = hi;
  }

  void add_constraint(const Vector& coeffs, Sense sense, double rhs) {
    require(static_cast<Index>(coeffs.size()) == num_vars(),
            "lp: constraint has wrong length");
    rows_.push_back({coeffs, sense, rhs});
  }

  void set_objective(const Vector& c, bool maximize) {
    require(static_cast<Index>(c.size()) == num_vars(),
            "lp: objective has wrong length");
    c_ = c;
    maximize_ = maximize;
  }

  Result solve() const;

 private:
  struct Row {
    Vector a;
    Sense sense;
    double rhs;
  };

  Vector lo_, hi_, c_;
  bool maximize_ = false;
  std::vector<Row> rows_;
};

namespace detail {

inline constexpr double kPivotTol = 1e-10;

// Tableau layout: rows 0..m-1 are constraints, row m is the reduced-cost row.
// Last column holds the right-hand side; entry (m, last) is minus the
// current objective value.
class Tableau {
 public:
  Tableau(Index m, Index n) : t_(Matrix::Zero(m + 1, n + 1)), basis_(m) {}

  double& at(Index r, Index c) {
    return t_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }
  double at(Index r, Index c) const {
    return t_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }
  Index rows() const { return static_cast<Index>(t_.rows()) - 1; }
  Index cols() const { return static_cast<Index>(t_.cols()) - 1; }
  double rhs(Index r) const { return at(r, cols()); }
  std::vector<Index>& basis() { return basis_; }

  void pivot(Index r, Index c) {
    const auto er = static_cast<Eigen::Index>(r);
    const auto ec = static_cast<Eigen::Index>(c);
    t_.row(er) /= t_(er, ec);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i != er && t_(i, ec) != 0.0) t_.row(i) -= t_(i, ec) * t_.row(er);
    }
    basis_[r] = c;
  }

  // Minimizes over columns [0, allowed). Returns false when unbounded.
  bool run(Index allowed) {
    const Index m = rows();
    for (;;) {
      Index enter = allowed;
      for (Index j = 0; j < allowed; ++j) {
        if (at(m, j) < -kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter == allowed) return true;
      Index leave = m;
      double best = kInf;
      for (Index i = 0; i < m; ++i) {
        const double a = at(i, enter);
        if (a > kPivotTol) {
          const double ratio = rhs(i) / a;
          if (leave == m || ratio < best - kPivotTol) {
            best = ratio;
            leave = i;
          } else if (ratio <= best + kPivotTol && basis_[i] < basis_[leave]) {
            best = std::min(best, ratio);
            leave = i;
          }
        }
      }
      if (leave == m) return false;
      pivot(leave, enter);
    }
  }

 private:
  Matrix t_;
  std::vector<Index> basis_;
};

}  // namespace detail

inline Result Problem::solve() const {
  const Index n = num_vars();
  // Shift x = lo + u with u >= 0; finite upper bounds become rows.
  struct StdRow {
    Vector a;
    Sense sense;
    double rhs;
  };
  std::vector<StdRow> std_rows;
  for (const auto& row : rows_) {
    std_rows.push_back({row.a, row.sense, row.rhs - row.a.dot(lo_)});
  }
  for (Index j = 0; j < n; ++j) {
    const auto ej = static_cast<Eigen::Index>(j);
    if (std::isfinite(hi_(ej))) {
      Vector a = Vector::Zero(static_cast<Eigen::Index>(n));
      a(ej) = 1.0;
      std_rows.push_back({a, Sense::le, hi_(ej) - lo_(ej)});
    }
  }

  const Index m = std_rows.size();
  Index num_slack = 0;
  for (const auto& r : std_rows) num_slack += (r.sense == Sense::eq) ? 0 : 1;
  const Index art0 = n + num_slack;
  const Index total = art0 + m;

  detail::Tableau tab(m, total);
  Index slack = n;
  for (Index i = 0; i < m; ++i) {
    const auto& r = std_rows[i];
    const double sign = r.rhs < 0.0 ? -1.0 : 1.0;
    for (Index j = 0; j < n; ++j) {
      tab.at(i, j) = sign * r.a(static_cast<Eigen::Index>(j));
    }
    if (r.sense != Sense::eq) {
      tab.at(i, slack) = sign * (r.sense == Sense::le ? 1.0 : -1.0);
      ++slack;
    }
    tab.at(i, art0 + i) = 1.0;
    tab.at(i, total) = sign * r.rhs;
    tab.basis()[i] = art0 + i;
  }

  // Phase 1: minimize the sum of artificials.
  for (Index j = 0; j <= total; ++j) {
    if (j >= art0 && j < total) continue;
    double s = 0.0;
    for (Index i = 0; i < m; ++i) s += tab.at(i, j);
    tab.at(m, j) = -s;
  }
  tab.run(total);
  Result result;
  if (-tab.at(m, total) > 1e-9 * std::max(1.0, static_cast<double>(m))) {
    result.status = Status::infeasible;
    return result;
  }
  // Drive remaining artificials out of the basis where possible.
  for (Index i = 0; i < m; ++i) {
    if (tab.basis()[i] < art0) continue;
    for (Index j = 0; j < art0; ++j) {
      if (std::abs(tab.at(i, j)) > detail::kPivotTol) {
        tab.pivot(i, j);
        break;
      }
    }
  }

  // Phase 2 on the original objective, expressed in u.
  Vector cost = Vector::Zero(static_cast<Eigen::Index>(total));
  const double dir = maximize_ ? -1.0 : 1.0;
  cost.head(static_cast<Eigen::Index>(n)) = dir * c_;
  for (Index j = 0; j <= total; ++j) {
    double v = (j < total) ? cost(static_cast<Eigen::Index>(j)) : 0.0;
    for (Index i = 0; i < m; ++i) {
      const Index b = tab.basis()[i];
      const double cb = b < total ? cost(static_cast<Eigen::Index>(b)) : 0.0;
      v -= cb * tab.at(i, j);
    }
    tab.at(m, j) = v;
  }
  if (!tab.run(art0)) {
    result.status = Status::unbounded;
    return result;
  }

  Vector u = Vector::Zero(static_cast<Eigen::Index>(n));
  for (Index i = 0; i < m; ++i) {
    const Index b = tab.basis()[i];
    if (b < n) u(static_cast<Eigen::Index>(b)) = tab.rhs(i);
  }
  result.status = Status::optimal;
  result.x = lo_ + u;
  result.objective = c_.dot(result.x);
  return result;
}

}  // namespace pmids::lp

#endif  // PMIDS_LP_HPP
