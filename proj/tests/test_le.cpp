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

#include "bdl/le.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

namespace bdl {
namespace {

using testing::finite_difference;
using testing::random_matrix;

struct Instance {
  Matrix w, phi, labels;
  SparseMatrix g;
};

// n instances with p kernel features (plus the bias row) and c labels.
Instance random_instance(std::mt19937_64& rng, Index n, Index p, Index c) {
  Instance out;
  const Matrix x = random_matrix(n, 3, rng);
  out.phi = Matrix::Ones(p + 1, n);
  out.phi.topRows(p) = random_matrix(p, n, rng);
  std::bernoulli_distribution coin(0.5);
  out.labels = Matrix::Zero(c, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < c; ++j) out.labels(j, i) = coin(rng) ? 1.0 : 0.0;
    out.labels(i % c, i) = 1.0;
  }
  out.g = similarity_graph(x, c + 1).g;
  out.w = random_matrix(c, p + 1, rng);
  return out;
}

Matrix logical_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

TEST(LeObjective, ZeroWeights) {
  std::mt19937_64 rng(1);
  const Instance in = random_instance(rng, 10, 4, 3);
  EXPECT_DOUBLE_EQ(le_objective(Matrix::Zero(3, 5), in.phi, in.labels, in.g, 0.0, 0.0), in.labels.squaredNorm());
}

TEST(LeObjective, ExactFitBothDirections) {
  const Matrix eye = Matrix::Identity(4, 4);
  const SparseMatrix zero(4, 4);
  for (double alpha : {0.0, 0.5, 3.0}) EXPECT_EQ(le_objective(eye, eye, eye, zero, alpha, 1.0), 0.0);
}

TEST(LeObjective, NaiveLoops) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const Instance in = random_instance(rng, 12, 5, 3);
    const double alpha = 0.3, lambda = 0.7;
    const Index n = 12, c = 3, q = 6;
    double map = 0.0, rec = 0.0;
    Matrix mapped(c, n);
    for (Index i = 0; i < n; ++i) {
      for (Index r = 0; r < c; ++r) {
        double acc = 0.0;
        for (Index k = 0; k < q; ++k) acc += in.w(r, k) * in.phi(k, i);
        mapped(r, i) = acc;
        map += (acc - in.labels(r, i)) * (acc - in.labels(r, i));
      }
      for (Index k = 0; k < q; ++k) {
        double acc = 0.0;
        for (Index r = 0; r < c; ++r) acc += in.w(r, k) * in.labels(r, i);
        rec += (in.phi(k, i) - acc) * (in.phi(k, i) - acc);
      }
    }
    const Matrix g(in.g);
    double manifold = 0.0;
    for (Index r = 0; r < c; ++r)
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) manifold += mapped(r, i) * g(i, j) * mapped(r, j);
    const double expected = map + alpha * rec + lambda * manifold;
    EXPECT_NEAR(le_objective(in.w, in.phi, in.labels, in.g, alpha, lambda), expected, 1e-10 * std::max(1.0, expected));
    EXPECT_NEAR(le_objective(in.w, in.phi, in.labels, in.g, 1.0, 0.0) - le_objective(in.w, in.phi, in.labels, in.g, 0.0, 0.0),
                rec, 1e-10 * std::max(1.0, rec));
  }
}

TEST(LeGradient, AtZero) {
  std::mt19937_64 rng(3);
  const Instance in = random_instance(rng, 10, 4, 3);
  const double alpha = 0.25;
  const Matrix expected = -2.0 * (1.0 + alpha) * in.labels * in.phi.transpose();
  EXPECT_LT((le_gradient(Matrix::Zero(3, 5), in.phi, in.labels, in.g, alpha, 0.0) - expected).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(LeGradient, FiniteDifferences) {
  std::mt19937_64 rng(4);
  const double values[] = {0.0, 1e-3, 1.0};
  int instance = 0, combination = 0;
  for (double alpha : values) {
    for (double lambda : values) {
      const int repeats = combination++ < 2 ? 3 : 2;  // 20 instances over the 9 combinations
      for (int r = 0; r < repeats; ++r, ++instance) {
        const Instance in = random_instance(rng, 20, 9, 4);
        const Matrix analytic = le_gradient(in.w, in.phi, in.labels, in.g, alpha, lambda);
        const Matrix numeric = finite_difference(
            [&](const Matrix& w) { return le_objective(w, in.phi, in.labels, in.g, alpha, lambda); }, in.w);
        const double rel = (analytic - numeric).norm() / std::max(numeric.norm(), 1e-300);
        EXPECT_LT(rel, 1e-5) << "alpha " << alpha << " lambda " << lambda;
      }
    }
  }
  EXPECT_EQ(instance, 20);
}

TEST(LeProblemTest, MatchesFreeFunctions) {
  std::mt19937_64 rng(5);
  const Instance in = random_instance(rng, 15, 6, 4);
  for (double alpha : {0.0, 0.2}) {
    for (double lambda : {0.0, 0.4}) {
      const LeProblem problem(in.phi, in.labels, in.g, alpha, lambda);
      RowMajorMatrix w_rm = in.w;
      const Vector flat = Eigen::Map<const Vector>(w_rm.data(), w_rm.size());
      Vector grad;
      const double value = problem(flat, grad);
      EXPECT_NEAR(value, le_objective(in.w, in.phi, in.labels, in.g, alpha, lambda), 1e-10 * std::max(1.0, value));
      const RowMajorMatrix expected = le_gradient(in.w, in.phi, in.labels, in.g, alpha, lambda);
      EXPECT_LT((grad - Eigen::Map<const Vector>(expected.data(), expected.size())).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(LeGradient, ShapeErrors) {
  std::mt19937_64 rng(6);
  const Instance in = random_instance(rng, 10, 4, 3);
  try {
    le_gradient(Matrix::Zero(3, 4), in.phi, in.labels, in.g, 0.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::dimension_mismatch);
  }
}

Matrix random_logical(std::mt19937_64& rng, Index n, Index c) {
  std::bernoulli_distribution coin(0.4);
  Matrix l = Matrix::Zero(n, c);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < c; ++j) l(i, j) = coin(rng) ? 1.0 : 0.0;
    l(i, i % c) = 1.0;
  }
  return l;
}

TEST(TrainBdLe, ExactFitWithSquareFeatures) {
  std::mt19937_64 rng(7);
  const Index n = 6;
  const Matrix x = random_matrix(n, n - 1, rng);
  const Matrix l = random_logical(rng, n, 3);
  LeHyper hyper;
  hyper.alpha = 0.0;
  hyper.lambda = 0.0;
  hyper.map = MapKind::linear;
  hyper.optimizer.grad_tol = 1e-12;
  hyper.optimizer.max_iters = 2000;
  const LeModel model = train_bd_le(x, l, hyper);
  EXPECT_LT(le_objective(model.w_hat, feature_map_apply(model.feature_map, x), l.transpose(),
                         similarity_graph(x, 4).g, 0.0, 0.0),
            1e-8);
  EXPECT_LT((recover_raw(model, x) - l).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(TrainBdLe, ConvergesWithMonotoneTrace) {
  std::mt19937_64 rng(8);
  const Matrix x = random_matrix(60, 5, rng);
  const Matrix l = random_logical(rng, 60, 4);
  for (MapKind map : {MapKind::linear, MapKind::empirical_gaussian}) {
    LeHyper hyper;
    hyper.map = map;
    const LeModel model = train_bd_le(x, l, hyper);
    EXPECT_NE(model.info.status, LbfgsStatus::line_search_failure);
    ASSERT_FALSE(model.info.trace.empty());
    for (std::size_t i = 1; i < model.info.trace.size(); ++i) EXPECT_LE(model.info.trace[i], model.info.trace[i - 1]);
    if (model.info.status == LbfgsStatus::converged) {
      EXPECT_LE(model.info.grad_norm, 1e-6 * std::max(1.0, l.norm()));
    } else {
      EXPECT_EQ(model.info.iterations, 500);
    }
    for (const StepRecord& s : model.info.steps) {
      EXPECT_LE(s.f_end, s.f_start + 1e-4 * s.step * s.slope_start);
      EXPECT_LE(std::abs(s.slope_end), 0.9 * std::abs(s.slope_start));
    }
    EXPECT_EQ(model.w_hat.rows(), 4);
    EXPECT_EQ(model.w_hat.cols(), model.feature_map.output_dim() + 1);
    EXPECT_EQ(model.k, 5);
  }
}

TEST(TrainBdLe, GradientVanishesAtConvergence) {
  std::mt19937_64 rng(9);
  const Matrix x = random_matrix(40, 4, rng);
  const Matrix l = random_logical(rng, 40, 3);
  LeHyper hyper;
  hyper.map = MapKind::linear;
  const LeModel model = train_bd_le(x, l, hyper);
  ASSERT_EQ(model.info.status, LbfgsStatus::converged);
  const Matrix grad = le_gradient(model.w_hat, feature_map_apply(model.feature_map, x), l.transpose(),
                                  similarity_graph(x, 4).g, hyper.alpha, hyper.lambda);
  EXPECT_LT(grad.norm(), 1e-4 * std::max(1.0, l.norm()));
}

TEST(TrainUdLe, SameAsZeroAlpha) {
  std::mt19937_64 rng(10);
  const Matrix x = random_matrix(30, 4, rng);
  const Matrix l = random_logical(rng, 30, 3);
  LeHyper hyper;
  hyper.alpha = 0.0;
  hyper.lambda = 0.05;
  const LeModel bd = train_bd_le(x, l, hyper);
  const LeModel ud = train_ud_le(x, l, 0.05);
  EXPECT_EQ(bd.w_hat, ud.w_hat);
  EXPECT_EQ(bd.info.trace, ud.info.trace);
}

TEST(TrainUdLe, MinimizesTheAlphaFreeObjective) {
  std::mt19937_64 rng(11);
  const Matrix x = random_matrix(40, 4, rng);
  const Matrix l = random_logical(rng, 40, 3);
  LeHyper hyper;
  hyper.map = MapKind::linear;
  hyper.alpha = 0.5;
  hyper.lambda = 0.1;
  hyper.optimizer.grad_tol = 1e-10;
  const LeModel bd = train_bd_le(x, l, hyper);
  const LeModel ud = train_ud_le(x, l, hyper.lambda, hyper);
  const Matrix phi = feature_map_apply(ud.feature_map, x);
  const SparseMatrix g = similarity_graph(x, 4).g;
  const double at_ud = le_objective(ud.w_hat, phi, l.transpose(), g, 0.0, hyper.lambda);
  const double at_bd = le_objective(bd.w_hat, phi, l.transpose(), g, 0.0, hyper.lambda);
  EXPECT_LE(at_ud, at_bd + 1e-9 * at_bd);
  EXPECT_LT(le_gradient(ud.w_hat, phi, l.transpose(), g, 0.0, hyper.lambda).norm(), 1e-4 * std::max(1.0, l.norm()));
}

TEST(TrainBdLe, Errors) {
  std::mt19937_64 rng(12);
  const Matrix x = random_matrix(4, 2, rng);
  try {
    train_bd_le(x, random_logical(rng, 4, 3));  // k = 4 needs 5 rows
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::k_too_large);
  }
  Matrix bad = Matrix::Zero(4, 2);
  bad(0, 0) = bad(1, 1) = bad(2, 0) = 1.0;
  try {
    train_bd_le(x, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invariant_violation);
    EXPECT_NE(std::string(e.what()).find("row 4"), std::string::npos);
  }
  bad(3, 0) = 0.5;
  EXPECT_THROW(train_bd_le(x, bad), Error);
}

TEST(Recover, ZeroWeightsGiveUniform) {
  LeModel model;
  model.feature_map = feature_map_fit(Matrix::Ones(3, 2), MapKind::linear);
  model.w_hat = Matrix::Zero(4, 3);
  const Matrix out = recover(model, Matrix::Ones(5, 2));
  EXPECT_TRUE((out.array() == 0.25).all());
}

TEST(Recover, Renormalizes) {
  LeModel model;
  model.feature_map = feature_map_fit(Matrix::Zero(2, 1), MapKind::linear);
  model.w_hat = Matrix::Zero(3, 2);
  model.w_hat.col(1) << 2, 1, 1;  // bias column only
  const Matrix out = recover(model, Matrix::Zero(1, 1));
  EXPECT_NEAR(out(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(out(0, 1), 0.25, 1e-15);
  EXPECT_NEAR(out(0, 2), 0.25, 1e-15);
}

TEST(Recover, RowsAreDistributions) {
  std::mt19937_64 rng(13);
  const Matrix x = random_matrix(30, 3, rng);
  const LeModel model = train_bd_le(x, random_logical(rng, 30, 4));
  const Matrix out = recover(model, random_matrix(20, 3, rng));
  for (Index i = 0; i < out.rows(); ++i) {
    EXPECT_NEAR(out.row(i).sum(), 1.0, 1e-9);
    EXPECT_GE(out.row(i).minCoeff(), 0.0);
  }
}

TEST(Binarize, Examples) {
  EXPECT_EQ(binarize(Matrix::Constant(1, 4, 0.25)), Matrix::Ones(1, 4));
  EXPECT_EQ(binarize(logical_rows({{0.7, 0.2, 0.1}})), logical_rows({{1, 0, 0}}));
  EXPECT_EQ(binarize(logical_rows({{0.34, 0.33, 0.33}})), logical_rows({{1, 0, 0}}));
  EXPECT_EQ(binarize(logical_rows({{0.1, 0.45, 0.45}})), logical_rows({{0, 1, 1}}));
}

TEST(Binarize, ArgmaxFallback) {
  BinarizeRule rule;
  rule.kind = BinarizeRule::Kind::fixed;
  rule.threshold = 0.9;
  EXPECT_EQ(binarize(logical_rows({{0.2, 0.4, 0.4}}), rule), logical_rows({{0, 1, 0}}));
}

TEST(NormalizeLogical, RowsSumToOne) {
  EXPECT_EQ(normalize_logical(logical_rows({{1, 0, 1, 1}})), logical_rows({{1.0 / 3, 0, 1.0 / 3, 1.0 / 3}}));
}

TEST(ModelFile, RoundTrip) {
  std::mt19937_64 rng(14);
  const Matrix x = random_matrix(20, 3, rng);
  const Matrix l = random_logical(rng, 20, 3);
  for (MapKind map : {MapKind::linear, MapKind::empirical_gaussian}) {
    LeHyper hyper;
    hyper.map = map;
    hyper.optimizer.max_iters = 20;
    const LeModel model = train_bd_le(x, l, hyper);
    std::stringstream ss;
    write_le_model(ss, model);
    const std::string header = ss.str().substr(0, ss.str().find('\n'));
    EXPECT_EQ(header.rfind(std::string("LE-MODEL 3 ") + std::to_string(model.feature_map.output_dim()) + " " +
                               std::string(map_kind_name(map)) + " ",
                           0),
              0u)
        << header;
    const LeModel back = read_le_model(ss);
    EXPECT_EQ(back.w_hat, model.w_hat);
    EXPECT_EQ(back.feature_map.kind, map);
    EXPECT_EQ(back.feature_map.anchors, model.feature_map.anchors);
    EXPECT_EQ(recover(back, x), recover(model, x));
  }
}

TEST(ModelFile, RejectsMalformed) {
  for (const char* text : {"", "LE-MODEL 2 1 rbf 1\n", "LE-MODEL 2 1 linear 1\n1 2\n", "LE-MODEL 1 2 egk 1\n1 2 3\n4\n"}) {
    std::istringstream in(text);
    try {
      read_le_model(in);
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::parse_error) << text;
    }
  }
}

}  // namespace
}  // namespace bdl
