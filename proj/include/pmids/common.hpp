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

#ifndef PMIDS_COMMON_HPP
#define PMIDS_COMMON_HPP

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pmids {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = std::size_t;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised on malformed input: wrong dimensions, parameters out of range.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised when a computation leaves its numerically valid range, e.g. a
/// posterior variance that is negative beyond rounding.
class NumericalError : public Error {
 public:
  using Error::Error;
};

namespace tol {
inline constexpr double kSolver = 1e-9;
inline constexpr double kInvariant = 1e-6;
inline constexpr double kProbability = 1e-12;
inline constexpr double kNorm = 1e-12;
inline constexpr double kHull = 1e-8;
inline constexpr double kRank = 1e-7;
inline constexpr double kSpan = 1e-7;
inline constexpr double kVariance = 1e-8;
}  // namespace tol

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace pmids

#endif  // PMIDS_COMMON_HPP
