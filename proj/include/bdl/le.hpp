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

/// \file le.hpp
///
/// Bidirectional label enhancement: recover label distributions from logical
/// labels by minimizing, over W (c x (p+1)),
///
///     T(W) = |W Phi - L|^2 + alpha |Phi - W^T L|^2 + lambda tr(W Phi G Phi^T W^T)
///
/// where Phi holds mapped instances [phi(x_i); 1] as columns, L the logical
/// labels as columns and G the neighbour-graph matrix. The second term is the
/// tied-weight reconstruction of the features from the labels.

#include "bdl/common.hpp"
#include "bdl/graph.hpp"
#include "bdl/optimizer.hpp"

#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace bdl {

struct LeHyper {
  double alpha = 1e-3;
  double lambda = 1e-3;
  Index k = 0;  // neighbours; 0 selects c + 1
  double sigma = 1.0;
  MapKind map = MapKind::empirical_gaussian;
  std::optional<double> width;  // feature-map width; mean pairwise distance when unset
  LbfgsConfig optimizer{};
};

struct LeTrainInfo {
  LbfgsStatus status = LbfgsStatus::max_iterations;
  int iterations = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  std::vector<double> trace;
  std::vector<StepRecord> steps;
};

struct LeModel {
  Matrix w_hat;  // c x (p+1)
  FeatureMap feature_map;
  double alpha = 0.0;
  double lambda = 0.0;
  Index k = 0;
  LeTrainInfo info;
};

namespace detail {

inline void check_le_shapes(const Matrix& w, const Matrix& phi, const Matrix& labels, const SparseMatrix& g) {
  require(w.cols() == phi.rows(), Errc::dimension_mismatch, "W columns must equal Phi rows");
  require(labels.rows() == w.rows(), Errc::dimension_mismatch, "L rows must equal W rows");
  require(labels.cols() == phi.cols(), Errc::dimension_mismatch, "L and Phi must have the same instance count");
  require(g.rows() == phi.cols() && g.cols() == phi.cols(), Errc::dimension_mismatch, "G must be n x n");
}

}  // namespace detail

/// T(W) with labels and Phi as column-per-instance matrices.
inline double le_objective(const Matrix& w, const Matrix& phi, const Matrix& labels, const SparseMatrix& g,
                           double alpha, double lambda) {
  detail::check_le_shapes(w, phi, labels, g);
  const Matrix mapped = w * phi;  // c x n
  double value = (mapped - labels).squaredNorm();
  if (alpha != 0.0) value += alpha * (phi - w.transpose() * labels).squaredNorm();
  if (lambda != 0.0) value += lambda * (mapped * g).cwiseProduct(mapped).sum();
  return value;
}

/// dT/dW = 2 W Phi Phi^T - 2 L Phi^T - 2 alpha L Phi^T + 2 alpha L L^T W
///         + lambda W Phi G^T Phi^T + lambda W Phi G Phi^T
inline Matrix le_gradient(const Matrix& w, const Matrix& phi, const Matrix& labels, const SparseMatrix& g,
                          double alpha, double lambda) {
  detail::check_le_shapes(w, phi, labels, g);
  const Matrix mapped = w * phi;
  Matrix left = 2.0 * mapped - 2.0 * (1.0 + alpha) * labels;
  if (lambda != 0.0) {
    const SparseMatrix g_t = g.transpose();
    left += lambda * (mapped * g_t + mapped * g);
  }
  Matrix grad = left * phi.transpose();
  if (alpha != 0.0) grad += 2.0 * alpha * (labels * labels.transpose()) * w;
  return grad;
}

/// Everything needed to evaluate T and its gradient for one training set.
struct LeProblem {
  LeProblem(Matrix phi_in, Matrix labels_in, const SparseMatrix& g_in, double alpha_in, double lambda_in)
      : phi(std::move(phi_in)),
        labels(std::move(labels_in)),
        g(g_in),
        g_sym(SparseMatrix(g_in.transpose()) + g_in),
        alpha(alpha_in),
        lambda(lambda_in) {
    detail::check_le_shapes(Matrix::Zero(labels.rows(), phi.rows()), phi, labels, g);
  }

  Matrix phi;     // (p+1) x n
  Matrix labels;  // c x n
  SparseMatrix g;
  SparseMatrix g_sym;  // G + G^T
  double alpha = 0.0;
  double lambda = 0.0;

  Index rows() const { return labels.rows(); }
  Index cols() const { return phi.rows(); }

  // Evaluates on a row-major flattening of W, reusing W Phi for both outputs.
  double operator()(const Vector& flat, Vector& grad_flat) const {
    const Eigen::Map<const RowMajorMatrix> w(flat.data(), rows(), cols());
    const Matrix mapped = w * phi;
    double value = (mapped - labels).squaredNorm();
    if (alpha != 0.0) value += alpha * (phi - w.transpose() * labels).squaredNorm();
    if (lambda != 0.0) value += lambda * (mapped * g).cwiseProduct(mapped).sum();

    Matrix left = 2.0 * mapped - 2.0 * (1.0 + alpha) * labels;
    if (lambda != 0.0) left += lambda * (mapped * g_sym);
    RowMajorMatrix grad = left * phi.transpose();
    if (alpha != 0.0) grad += 2.0 * alpha * (labels * labels.transpose()) * w;
    grad_flat = Eigen::Map<const Vector>(grad.data(), grad.size());
    return value;
  }
};

/// Logical labels (n x c, entries 0/1, at least one 1 per row) or throws.
inline void validate_logical(const Matrix& l) {
  for (Index i = 0; i < l.rows(); ++i) {
    bool any = false;
    for (Index j = 0; j < l.cols(); ++j) {
      const double v = l(i, j);
      require(v == 0.0 || v == 1.0, Errc::invariant_violation,
              "logical label row " + std::to_string(i + 1) + " has a value other than 0/1");
      any = any || v == 1.0;
    }
    require(any, Errc::invariant_violation, "logical label row " + std::to_string(i + 1) + " has no positive label");
  }
}

/// Minimizes T from W = 0 with L-BFGS. `logical` is n x c.
inline LeModel train_bd_le(const Matrix& x, const Matrix& logical, const LeHyper& hyper = {}) {
  require(x.rows() == logical.rows(), Errc::dimension_mismatch, "train_bd_le: feature/label row counts differ");
  require(hyper.alpha >= 0.0 && hyper.lambda >= 0.0, Errc::invalid_argument, "alpha, lambda must be >= 0");
  validate_logical(logical);
  const Index k = hyper.k > 0 ? hyper.k : logical.cols() + 1;
  require(x.rows() >= k + 1, Errc::k_too_large,
          "train_bd_le: need at least k+1 = " + std::to_string(k + 1) + " instances");

  LeModel model;
  model.alpha = hyper.alpha;
  model.lambda = hyper.lambda;
  model.k = k;
  model.feature_map = feature_map_fit(x, hyper.map, hyper.width);

  const LeProblem problem(feature_map_apply(model.feature_map, x), logical.transpose(),
                          similarity_graph(x, k, hyper.sigma).g, hyper.alpha, hyper.lambda);

  LbfgsConfig cfg = hyper.optimizer;
  if (!cfg.grad_reference) cfg.grad_reference = std::max(1.0, problem.labels.norm());
  const Vector w0 = Vector::Zero(problem.rows() * problem.cols());
  LbfgsResult result = lbfgs_minimize(problem, w0, cfg);

  model.w_hat = Eigen::Map<const RowMajorMatrix>(result.x.data(), problem.rows(), problem.cols());
  model.info.status = result.status;
  model.info.iterations = result.iterations;
  model.info.objective = result.f;
  model.info.grad_norm = result.grad_norm;
  model.info.trace = std::move(result.trace);
  model.info.steps = std::move(result.steps);
  return model;
}

/// The reconstruction-free ablation: the same optimization with alpha = 0.
inline LeModel train_ud_le(const Matrix& x, const Matrix& logical, double lambda, LeHyper hyper = {}) {
  hyper.alpha = 0.0;
  hyper.lambda = lambda;
  return train_bd_le(x, logical, hyper);
}

/// W phi_i per row of `x`, before simplex repair (n x c).
inline Matrix recover_raw(const LeModel& model, const Matrix& x) {
  const Matrix phi = feature_map_apply(model.feature_map, x);
  require(phi.rows() == model.w_hat.cols(), Errc::dimension_mismatch, "recover: feature map and W disagree");
  return (model.w_hat * phi).transpose();
}

inline Matrix recover(const LeModel& model, const Matrix& x) { return repair_simplex_rows(recover_raw(model, x)); }

struct BinarizeRule {
  enum class Kind { inverse_label_count, fixed } kind = Kind::inverse_label_count;
  double threshold = 0.0;  // used by Kind::fixed
};

/// l_ij = 1 iff d_ij >= threshold (1/c by default). A row with no entry at
/// the threshold gets its first maximal entry set instead.
inline Matrix binarize(const Matrix& d, const BinarizeRule& rule = {}) {
  const double threshold = rule.kind == BinarizeRule::Kind::fixed ? rule.threshold
                                                                  : 1.0 / static_cast<double>(d.cols());
  Matrix l = Matrix::Zero(d.rows(), d.cols());
  for (Index i = 0; i < d.rows(); ++i) {
    bool any = false;
    for (Index j = 0; j < d.cols(); ++j) {
      if (d(i, j) >= threshold) {
        l(i, j) = 1.0;
        any = true;
      }
    }
    if (!any && d.cols() > 0) {
      Index best = 0;
      d.row(i).maxCoeff(&best);  // first maximum
      l(i, best) = 1.0;
    }
  }
  return l;
}

/// Row-normalized logical labels; the trivial enhancement baseline.
inline Matrix normalize_logical(const Matrix& l) {
  Matrix out = l;
  for (Index i = 0; i < out.rows(); ++i) out.row(i) /= out.row(i).sum();
  return out;
}

// Model file:
//   LE-MODEL <c> <p> <map:linear|egk> <width>
//   c lines of p+1 values (W rows)
//   for egk: p lines of anchor features
inline void write_le_model(std::ostream& os, const LeModel& model) {
  const FeatureMap& map = model.feature_map;
  const Index p = map.output_dim();
  os << "LE-MODEL " << model.w_hat.rows() << ' ' << p << ' ' << map_kind_name(map.kind) << ' '
     << format_sci(map.kind == MapKind::linear ? 1.0 : map.width) << '\n';
  auto write_rows = [&os](const Matrix& m) {
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << format_sci(m(i, j));
      os << '\n';
    }
  };
  write_rows(model.w_hat);
  if (map.kind == MapKind::empirical_gaussian) write_rows(map.anchors);
}

inline LeModel read_le_model(std::istream& is) {
  std::string tag, kind;
  Index c = 0, p = 0;
  double width = 0.0;
  std::string header;
  std::getline(is, header);
  std::istringstream hs(header);
  if (!(hs >> tag >> c >> p >> kind >> width) || tag != "LE-MODEL" || c <= 0 || p <= 0 || !(width > 0.0)) {
    throw Error(Errc::parse_error, "expected header 'LE-MODEL <c> <p> <linear|egk> <width>'");
  }
  const auto map_kind = parse_map_kind(kind);
  require(map_kind.has_value(), Errc::parse_error, "unknown feature map '" + kind + "'");

  LeModel model;
  model.feature_map.kind = *map_kind;
  model.feature_map.width = width;
  model.w_hat.resize(c, p + 1);
  for (Index i = 0; i < c; ++i) {
    for (Index j = 0; j <= p; ++j) {
      if (!(is >> model.w_hat(i, j))) throw Error(Errc::parse_error, "W row " + std::to_string(i + 1) + " is short");
    }
  }
  if (*map_kind == MapKind::linear) {
    model.feature_map.input_dim = p;
    return model;
  }

  std::string line;
  std::getline(is, line);  // rest of the last W row
  std::vector<std::vector<double>> rows;
  while (static_cast<Index>(rows.size()) < p && std::getline(is, line)) {
    std::istringstream ls(line);
    std::vector<double> row;
    for (double v; ls >> v;) row.push_back(v);
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(Errc::parse_error, "anchor row " + std::to_string(rows.size() + 1) + " has the wrong length");
    }
    rows.push_back(std::move(row));
  }
  require(static_cast<Index>(rows.size()) == p, Errc::parse_error, "expected " + std::to_string(p) + " anchor rows");
  const auto m = static_cast<Index>(rows.front().size());
  model.feature_map.anchors.resize(p, m);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < m; ++j) model.feature_map.anchors(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  model.feature_map.input_dim = m;
  return model;
}

}  // namespace bdl
