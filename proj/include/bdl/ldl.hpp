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

/// \file ldl.hpp
///
/// Bidirectional label distribution learning.
///
/// The model maps features to distributions with theta (d x c) and, through
/// tied weights, reconstructs features from distributions with theta^T:
///
///     min |X theta - D|^2 + lambda1 |X - D theta^T|^2 + lambda2 |theta|^2
///
/// Setting the gradient to zero gives the Sylvester equation
/// (X^T X + lambda2 I) theta + theta (lambda1 D^T D) = (1 + lambda1) X^T D,
/// whose coefficients do not depend on theta, so one solve is the optimum.

#include "bdl/common.hpp"
#include "bdl/sylvester.hpp"

#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

namespace bdl {

struct LdlHyper {
  double lambda1 = 1e-3;
  double lambda2 = 1e-2;
};

struct LdlOptions {
  bool bias = false;         // append a constant-one feature column
  bool standardize = false;  // z-score features with training statistics
};

struct Standardization {
  RowVector mean;
  RowVector scale;
};

struct LdlModel {
  Matrix theta;  // d x c over the effective (transformed) features
  bool bias_added = false;
  std::optional<Standardization> standardize;

  Index input_dim() const { return theta.rows() - (bias_added ? 1 : 0); }
  Index label_count() const { return theta.cols(); }
};

namespace detail {

inline Standardization fit_standardization(const Matrix& x) {
  Standardization s;
  s.mean = x.colwise().mean();
  s.scale.resize(x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double sd = std::sqrt((x.col(j).array() - s.mean(j)).square().mean());
    s.scale(j) = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

inline Matrix transform_features(const Matrix& x, bool bias, const std::optional<Standardization>& standardize) {
  Matrix out(x.rows(), x.cols() + (bias ? 1 : 0));
  if (standardize) {
    out.leftCols(x.cols()) =
        ((x.rowwise() - standardize->mean).array().rowwise() / standardize->scale.array()).matrix();
  } else {
    out.leftCols(x.cols()) = x;
  }
  if (bias) out.rightCols(1).setOnes();
  return out;
}

inline void check_training_pair(const Matrix& x, const Matrix& d) {
  require(x.rows() == d.rows(), Errc::dimension_mismatch,
          "features have " + std::to_string(x.rows()) + " rows, distributions " + std::to_string(d.rows()));
  require(x.rows() > 0, Errc::empty_input, "no training rows");
  require_finite(x, "features");
  const Index bad = first_non_simplex_row(d);
  require(bad < 0, Errc::non_simplex_target, "distribution row " + std::to_string(bad + 1) + " is not on the simplex");
}

}  // namespace detail

/// A = X^T X + lambda2 I, B = lambda1 D^T D, C = (1 + lambda1) X^T D.
inline SylvesterSystem assemble_abc(const Matrix& x, const Matrix& d, const LdlHyper& hyper) {
  detail::check_training_pair(x, d);
  require(hyper.lambda1 >= 0.0 && hyper.lambda2 >= 0.0, Errc::invalid_argument, "lambda1, lambda2 must be >= 0");
  SylvesterSystem sys;
  sys.a = x.transpose() * x;
  sys.a.diagonal().array() += hyper.lambda2;
  sys.b = hyper.lambda1 * (d.transpose() * d);
  sys.c = (1.0 + hyper.lambda1) * (x.transpose() * d);
  return sys;
}

/// |X^T (X theta - D) - lambda1 (X^T - theta D^T) D + lambda2 theta|_F,
/// i.e. half the gradient norm of the objective.
inline double ldl_stationarity_residual(const Matrix& x, const Matrix& d, const Matrix& theta, const LdlHyper& hyper) {
  const Matrix grad = x.transpose() * (x * theta - d) - hyper.lambda1 * (x.transpose() - theta * d.transpose()) * d +
                      hyper.lambda2 * theta;
  return grad.norm();
}

inline double ldl_objective(const Matrix& x, const Matrix& d, const Matrix& theta, const LdlHyper& hyper) {
  require(x.rows() == d.rows() && theta.rows() == x.cols() && theta.cols() == d.cols(), Errc::dimension_mismatch,
          "ldl_objective: shapes do not conform");
  return (x * theta - d).squaredNorm() + hyper.lambda1 * (x - d * theta.transpose()).squaredNorm() +
         hyper.lambda2 * theta.squaredNorm();
}

/// Closed-form BD-LDL training; a single Sylvester solve.
inline LdlModel train_bd_ldl(const Matrix& x, const Matrix& d, const LdlHyper& hyper = {},
                             const LdlOptions& options = {}) {
  require(hyper.lambda2 > 0.0, Errc::invalid_argument, "train_bd_ldl: lambda2 must be positive");
  detail::check_training_pair(x, d);
  LdlModel model;
  model.bias_added = options.bias;
  if (options.standardize) model.standardize = detail::fit_standardization(x);
  const Matrix features = detail::transform_features(x, options.bias, model.standardize);
  model.theta = solve_sylvester(assemble_abc(features, d, hyper));
  return model;
}

/// Ridge regression (X^T X + lambda I)^{-1} X^T D; the reconstruction-free ablation.
inline LdlModel train_ud_ldl(const Matrix& x, const Matrix& d, double lambda, const LdlOptions& options = {}) {
  require(lambda >= 0.0, Errc::invalid_argument, "train_ud_ldl: lambda must be >= 0");
  detail::check_training_pair(x, d);
  LdlModel model;
  model.bias_added = options.bias;
  if (options.standardize) model.standardize = detail::fit_standardization(x);
  const Matrix features = detail::transform_features(x, options.bias, model.standardize);

  Matrix normal = features.transpose() * features;
  normal.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(normal);
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::singular_normal_equations, "X^T X + lambda I is not positive definite");
  }
  // LLT happily factors numerically singular matrices; reject those explicitly.
  const Vector diag = llt.matrixL().toDenseMatrix().diagonal();
  if (diag.minCoeff() <= 1e-8 * diag.maxCoeff()) {
    throw Error(Errc::singular_normal_equations, "X^T X + lambda I is numerically singular");
  }
  model.theta = llt.solve(features.transpose() * d);
  return model;
}

/// Raw outputs x * theta, before simplex repair.
inline Matrix predict_ldl_raw(const LdlModel& model, const Matrix& x) {
  require(x.cols() == model.input_dim(), Errc::dimension_mismatch,
          "predict_ldl: model expects " + std::to_string(model.input_dim()) + " features, got " +
              std::to_string(x.cols()));
  return detail::transform_features(x, model.bias_added, model.standardize) * model.theta;
}

inline Matrix predict_ldl(const LdlModel& model, const Matrix& x) {
  return repair_simplex_rows(predict_ldl_raw(model, x));
}

// Model file:
//   LDL-MODEL <d> <c> <bias:0|1>
//   d lines of c values (theta rows)
//   [STANDARDIZE <m>, then a mean line and a scale line, when standardized]
inline void write_ldl_model(std::ostream& os, const LdlModel& model) {
  os << "LDL-MODEL " << model.theta.rows() << ' ' << model.theta.cols() << ' ' << (model.bias_added ? 1 : 0) << '\n';
  for (Index i = 0; i < model.theta.rows(); ++i) {
    for (Index j = 0; j < model.theta.cols(); ++j) os << (j ? " " : "") << format_sci(model.theta(i, j));
    os << '\n';
  }
  if (model.standardize) {
    const auto& s = *model.standardize;
    os << "STANDARDIZE " << s.mean.size() << '\n';
    for (const RowVector* row : {&s.mean, &s.scale}) {
      for (Index j = 0; j < row->size(); ++j) os << (j ? " " : "") << format_sci((*row)(j));
      os << '\n';
    }
  }
}

namespace detail {

inline RowVector read_row(std::istream& is, Index count, const char* what) {
  RowVector row(count);
  for (Index j = 0; j < count; ++j) {
    if (!(is >> row(j))) throw Error(Errc::parse_error, std::string(what) + ": expected " + std::to_string(count) + " values");
  }
  return row;
}

}  // namespace detail

inline LdlModel read_ldl_model(std::istream& is) {
  std::string tag;
  Index d = 0, c = 0;
  int bias = 0;
  if (!(is >> tag >> d >> c >> bias) || tag != "LDL-MODEL" || d <= 0 || c <= 0 || (bias != 0 && bias != 1)) {
    throw Error(Errc::parse_error, "expected header 'LDL-MODEL <d> <c> <bias:0|1>'");
  }
  LdlModel model;
  model.bias_added = bias == 1;
  model.theta.resize(d, c);
  for (Index i = 0; i < d; ++i) model.theta.row(i) = detail::read_row(is, c, "theta row");
  if (is >> tag) {
    Index m = 0;
    if (tag != "STANDARDIZE" || !(is >> m) || m != model.input_dim()) {
      throw Error(Errc::parse_error, "expected 'STANDARDIZE " + std::to_string(model.input_dim()) + "'");
    }
    Standardization s;
    s.mean = detail::read_row(is, m, "standardization mean");
    s.scale = detail::read_row(is, m, "standardization scale");
    model.standardize = std::move(s);
  }
  require_finite(model.theta, "model theta");
  return model;
}

}  // namespace bdl
