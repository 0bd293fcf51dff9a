// Copyright 2026 The bdlearn Authors
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

#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bdl {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseMatrix = Eigen::SparseMatrix<double>;

enum class Errc {
  invalid_argument,
  dimension_mismatch,
  not_symmetric,
  not_psd,
  singular_pencil,
  singular_system,
  singular_normal_equations,
  k_too_large,
  non_simplex_target,
  not_descent_direction,
  line_search_failure,
  non_finite,
  empty_input,
  too_few_samples,
  parse_error,
  invariant_violation,
  io_error,
};

inline std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::not_symmetric: return "NotSymmetric";
    case Errc::not_psd: return "NotPSD";
    case Errc::singular_pencil: return "SingularPencil";
    case Errc::singular_system: return "SingularSystem";
    case Errc::singular_normal_equations: return "SingularNormalEquations";
    case Errc::k_too_large: return "KTooLarge";
    case Errc::non_simplex_target: return "NonSimplexTarget";
    case Errc::not_descent_direction: return "NotDescentDirection";
    case Errc::line_search_failure: return "LineSearchFailure";
    case Errc::non_finite: return "NonFinite";
    case Errc::empty_input: return "EmptyInput";
    case Errc::too_few_samples: return "TooFewSamples";
    case Errc::parse_error: return "ParseError";
    case Errc::invariant_violation: return "InvariantViolation";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

// Numerical failures map to CLI exit code 3; everything else is an input problem.
inline bool is_numerical(Errc code) {
  switch (code) {
    case Errc::not_psd:
    case Errc::singular_pencil:
    case Errc::singular_system:
    case Errc::singular_normal_equations:
    case Errc::not_descent_direction:
    case Errc::line_search_failure:
    case Errc::non_finite:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Floor applied to probabilities before division or logarithm.
inline constexpr double kProbabilityFloor = 1e-12;

inline void require(bool condition, Errc code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(Errc::dimension_mismatch,
                std::string(what) + ": " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw Error(Errc::non_finite, std::string(what) + " contains NaN or Inf");
}

/// Turns raw linear outputs into valid distributions, row by row.
///
/// Entries below the probability floor are raised to it and the row is
/// renormalized. A row with no positive entry becomes the uniform distribution.
inline Matrix repair_simplex_rows(const Matrix& raw) {
  Matrix out(raw.rows(), raw.cols());
  const double uniform = raw.cols() > 0 ? 1.0 / static_cast<double>(raw.cols()) : 0.0;
  for (Index i = 0; i < raw.rows(); ++i) {
    if ((raw.row(i).array() <= 0.0).all()) {
      out.row(i).setConstant(uniform);
      continue;
    }
    out.row(i) = raw.row(i).array().max(kProbabilityFloor).matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

/// Index of the first row whose entries are not a distribution within tol, or -1.
inline Index first_non_simplex_row(const Matrix& d, double tol = 1e-6) {
  for (Index i = 0; i < d.rows(); ++i) {
    if (!d.row(i).allFinite() || (d.row(i).array() < -tol).any() ||
        std::abs(d.row(i).sum() - 1.0) > tol) {
      return i;
    }
  }
  return -1;
}

/// Shortest-safe decimal for bit-exact round trips (17 significant digits).
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Scientific notation with 17 significant digits.
inline std::string format_sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

}  // namespace bdl
