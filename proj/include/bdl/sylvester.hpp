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

/// \file sylvester.hpp
///
/// Solver for A*theta + theta*B = C with A symmetric positive definite and B
/// symmetric positive semidefinite.
///
/// Both matrices are Cholesky-factored (A = P^T P, B = Q Q^T) and the factors
/// are decomposed by SVD. With P = U1 S1 V1^T and Q = U2 S2 V2^T the system
/// becomes diagonal in the bases V1 and U2:
///
///     (S1^T S1) T~ + T~ (S2 S2^T) = V1^T C U2,     theta = V1 T~ U2^T
///
/// so every entry of T~ is a scalar division. U1 and V2 cancel and are dropped.

#include "bdl/common.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cassert>

namespace bdl {

struct SylvesterSystem {
  Matrix a;  // d x d, symmetric positive definite
  Matrix b;  // c x c, symmetric positive semidefinite
  Matrix c;  // d x c
};

struct SylvesterFactorization {
  Matrix v1;      // d x d, orthogonal; A = V1 diag(sigma1) V1^T
  Matrix u2;      // c x c, orthogonal; B = U2 diag(sigma2) U2^T
  Vector sigma1;  // descending, > 0
  Vector sigma2;  // descending, >= 0
};

enum class FactorizationMethod {
  cholesky_svd,     // Cholesky factors, then SVD of the factors
  symmetric_eigen,  // direct self-adjoint eigendecomposition
};

struct CholeskyFactor {
  Matrix upper;         // R with R^T R = M + jitter * I
  double jitter = 0.0;  // diagonal shift that made the factorization succeed
};

inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr double kInitialJitter = 1e-12;
inline constexpr double kMaxJitter = 1e-6;
inline constexpr double kPencilCutoff = 1e-14;

inline bool is_symmetric(const Matrix& m, double rel_tol = kSymmetryTolerance) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).norm() <= rel_tol * m.norm();
}

/// Upper Cholesky factor of a symmetric PSD matrix.
///
/// Retries with a diagonal jitter (first kInitialJitter, then x10 per attempt,
/// capped at kMaxJitter) when the plain factorization breaks down.
inline CholeskyFactor cholesky_psd(const Matrix& m, double jitter = 0.0) {
  require(m.rows() == m.cols(), Errc::dimension_mismatch, "cholesky_psd: matrix is not square");
  require(jitter >= 0.0, Errc::invalid_argument, "cholesky_psd: negative jitter");
  require_finite(m, "cholesky_psd input");
  require(is_symmetric(m), Errc::not_symmetric, "cholesky_psd: matrix is not symmetric");

  const Index n = m.rows();
  double shift = jitter;
  for (;;) {
    Matrix shifted = m;
    shifted.diagonal().array() += shift;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() == Eigen::Success) return {llt.matrixU(), shift};
    if (shift >= kMaxJitter) {
      throw Error(Errc::not_psd, "cholesky_psd: factorization failed at jitter " + format_g17(shift) +
                                     " (n=" + std::to_string(n) + ")");
    }
    shift = shift == 0.0 ? kInitialJitter : std::min(shift * 10.0, kMaxJitter);
  }
}

inline void validate(const SylvesterSystem& sys) {
  const Index d = sys.a.rows();
  const Index c = sys.b.rows();
  require(sys.a.cols() == d, Errc::dimension_mismatch, "Sylvester: A is not square");
  require(sys.b.cols() == c, Errc::dimension_mismatch, "Sylvester: B is not square");
  require(sys.c.rows() == d && sys.c.cols() == c, Errc::dimension_mismatch,
          "Sylvester: C must be " + std::to_string(d) + "x" + std::to_string(c));
  require_finite(sys.a, "Sylvester A");
  require_finite(sys.b, "Sylvester B");
  require_finite(sys.c, "Sylvester C");
  require(is_symmetric(sys.a), Errc::not_symmetric, "Sylvester: A is not symmetric");
  require(is_symmetric(sys.b), Errc::not_symmetric, "Sylvester: B is not symmetric");
}

namespace detail {

// Eigenvalues of M recovered from the singular values of its jittered factor.
inline Vector shifted_squares(const Vector& singular_values, double jitter) {
  return (singular_values.array().square() - jitter).max(0.0).matrix();
}

#ifndef NDEBUG
inline bool is_orthogonal(const Matrix& u, double tol = 1e-8) {
  return (u.transpose() * u - Matrix::Identity(u.cols(), u.cols())).norm() <= tol * std::max<double>(1.0, u.cols());
}
#endif

inline SylvesterFactorization factorize_cholesky_svd(const SylvesterSystem& sys) {
  SylvesterFactorization f;

  // A = P^T P, P = U1 S1 V1^T  =>  A = V1 (S1^T S1) V1^T
  const CholeskyFactor p = cholesky_psd(sys.a);
  Eigen::BDCSVD<Matrix> svd_p(p.upper, Eigen::ComputeFullU | Eigen::ComputeFullV);
  f.v1 = svd_p.matrixV();
  f.sigma1 = shifted_squares(svd_p.singularValues(), p.jitter);
  assert(is_orthogonal(svd_p.matrixU()));

  // B = Q Q^T with Q lower, Q = U2 S2 V2^T  =>  B = U2 (S2 S2^T) U2^T
  const CholeskyFactor q = cholesky_psd(sys.b);
  const Matrix lower = q.upper.transpose();
  Eigen::BDCSVD<Matrix> svd_q(lower, Eigen::ComputeFullU | Eigen::ComputeFullV);
  f.u2 = svd_q.matrixU();
  f.sigma2 = shifted_squares(svd_q.singularValues(), q.jitter);
  assert(is_orthogonal(svd_q.matrixV()));

  return f;
}

inline void eigen_descending(const Matrix& m, Matrix& vectors, Vector& values) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw Error(Errc::not_psd, "eigendecomposition did not converge");
  values = es.eigenvalues().reverse().cwiseMax(0.0);
  vectors = es.eigenvectors().rowwise().reverse();
}

}  // namespace detail

inline SylvesterFactorization factorize(const SylvesterSystem& sys,
                                        FactorizationMethod method = FactorizationMethod::cholesky_svd) {
  validate(sys);
  if (method == FactorizationMethod::cholesky_svd) return detail::factorize_cholesky_svd(sys);

  SylvesterFactorization f;
  detail::eigen_descending(sys.a, f.v1, f.sigma1);
  detail::eigen_descending(sys.b, f.u2, f.sigma2);
  return f;
}

/// Solves the diagonalized system for a right-hand side C.
inline Matrix solve_factored(const SylvesterFactorization& f, const Matrix& c) {
  require(c.rows() == f.v1.rows() && c.cols() == f.u2.rows(), Errc::dimension_mismatch,
          "solve_factored: right-hand side shape");
  Matrix e = f.v1.transpose() * c * f.u2;
  for (Index j = 0; j < e.cols(); ++j) {
    for (Index i = 0; i < e.rows(); ++i) {
      const double denom = f.sigma1(i) + f.sigma2(j);
      if (!(denom > kPencilCutoff)) {
        throw Error(Errc::singular_pencil, "sigma1[" + std::to_string(i) + "] + sigma2[" + std::to_string(j) +
                                               "] = " + format_g17(denom));
      }
      e(i, j) /= denom;
    }
  }
  return f.v1 * e * f.u2.transpose();
}

inline Matrix solve_sylvester(const SylvesterSystem& sys,
                              FactorizationMethod method = FactorizationMethod::cholesky_svd) {
  return solve_factored(factorize(sys, method), sys.c);
}

inline double sylvester_residual(const SylvesterSystem& sys, const Matrix& theta) {
  return (sys.a * theta + theta * sys.b - sys.c).norm();
}

}  // namespace bdl
