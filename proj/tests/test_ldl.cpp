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

#include "bdl/ldl.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

namespace bdl {
namespace {

using testing::random_matrix;
using testing::random_simplex_rows;
using testing::ridge_oracle;

double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    double total = 0.0;
    for (Index j = 0; j < logits.cols(); ++j) total += std::exp(logits(i, j));
    for (Index j = 0; j < logits.cols(); ++j) out(i, j) = std::exp(logits(i, j)) / total;
  }
  return out;
}

TEST(AssembleAbc, IdentityNoRegularization) {
  const Matrix eye = Matrix::Identity(2, 2);
  const SylvesterSystem sys = assemble_abc(eye, eye, {0.0, 0.0});
  EXPECT_EQ(sys.a, eye);
  EXPECT_EQ(sys.b, Matrix::Zero(2, 2));
  EXPECT_EQ(sys.c, eye);
}

TEST(AssembleAbc, IdentityUnitRegularization) {
  const Matrix eye = Matrix::Identity(2, 2);
  const SylvesterSystem sys = assemble_abc(eye, eye, {1.0, 1.0});
  EXPECT_EQ(sys.a, 2.0 * eye);
  EXPECT_EQ(sys.b, eye);
  EXPECT_EQ(sys.c, 2.0 * eye);
}

TEST(AssembleAbc, EigenvalueShift) {
  std::mt19937_64 rng(20);
  const Matrix x = random_matrix(20, 5, rng);
  const Matrix d = random_simplex_rows(20, 3, rng);
  const double lambda2 = 0.37;
  const SylvesterSystem sys = assemble_abc(x, d, {0.5, lambda2});
  EXPECT_EQ(sys.a, sys.a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sys.a);
  EXPECT_GE(es.eigenvalues().minCoeff(), lambda2 - 1e-12);
}

TEST(AssembleAbc, RejectsNonSimplexTargets) {
  Matrix d(2, 2);
  d << 0.5, 0.5, 0.5, 0.4;
  try {
    assemble_abc(Matrix::Identity(2, 2), d, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::non_simplex_target);
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
  EXPECT_THROW(assemble_abc(Matrix::Identity(3, 3), Matrix::Identity(2, 2), {}), Error);
}

TEST(TrainBdLdl, IdentityDesignRecoversTargets) {
  Matrix d(2, 2);
  d << 0.7, 0.3, 0.2, 0.8;
  const LdlModel model = train_bd_ldl(Matrix::Identity(2, 2), d, {0.0, 1e-12});
  EXPECT_LT(max_abs_diff(model.theta, d), 1e-10);
}

TEST(TrainBdLdl, RidgeReduction) {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<Index> rows(10, 200), dims(1, 30), labels(2, 8);
  std::uniform_real_distribution<double> log_lambda(-3.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = rows(rng), d = dims(rng), c = labels(rng);
    const Matrix x = random_matrix(n, d, rng);
    const Matrix y = random_simplex_rows(n, c, rng);
    const double lambda2 = std::pow(10.0, log_lambda(rng));
    const Matrix oracle = ridge_oracle(x, y, lambda2);
    EXPECT_LT(max_abs_diff(train_bd_ldl(x, y, {0.0, lambda2}).theta, oracle), 1e-10) << "trial " << trial;
    EXPECT_LT(max_abs_diff(train_ud_ldl(x, y, lambda2).theta, oracle), 1e-10) << "trial " << trial;
  }
}

TEST(TrainBdLdl, Stationarity) {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = random_matrix(80, 12, rng);
    const Matrix d = random_simplex_rows(80, 5, rng);
    for (const LdlHyper hyper : {LdlHyper{}, LdlHyper{1.0, 1e-3}, LdlHyper{100.0, 10.0}}) {
      const LdlModel model = train_bd_ldl(x, d, hyper);
      const double scale = std::max(1.0, (x.transpose() * d).norm());
      EXPECT_LE(ldl_stationarity_residual(x, d, model.theta, hyper), 1e-6 * scale);
    }
  }
}

TEST(TrainBdLdl, PlantedModelObjective) {
  std::mt19937_64 rng(66);
  const Matrix x = random_matrix(100, 6, rng);
  const Matrix planted = random_matrix(6, 4, rng);
  const Matrix d = softmax_rows(x * planted);
  const LdlHyper hyper{};
  const LdlModel model = train_bd_ldl(x, d, hyper);
  EXPECT_LE(ldl_objective(x, d, model.theta, hyper), ldl_objective(x, d, planted, hyper));
}

TEST(TrainBdLdl, GlobalMinimumAgainstPerturbations) {
  std::mt19937_64 rng(67);
  const Matrix x = random_matrix(60, 8, rng);
  const Matrix d = random_simplex_rows(60, 3, rng);
  const LdlHyper hyper{0.5, 0.1};
  const Matrix theta = train_bd_ldl(x, d, hyper).theta;
  const double best = ldl_objective(x, d, theta, hyper);
  for (int trial = 0; trial < 100; ++trial) {
    EXPECT_LE(best, ldl_objective(x, d, theta + 0.01 * random_matrix(8, 3, rng), hyper));
  }
}

TEST(TrainBdLdl, RequiresPositiveLambda2) {
  try {
    train_bd_ldl(Matrix::Identity(2, 2), Matrix::Identity(2, 2), {1e-3, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_argument);
  }
}

TEST(TrainUdLdl, IdentityDesign) {
  Matrix d(2, 2);
  d << 0.7, 0.3, 0.2, 0.8;
  EXPECT_LT(max_abs_diff(train_ud_ldl(Matrix::Identity(2, 2), d, 0.0).theta, d), 1e-15);
}

TEST(TrainUdLdl, Shrinkage) {
  std::mt19937_64 rng(8);
  const Matrix x = random_matrix(50, 6, rng);
  const Matrix d = random_simplex_rows(50, 3, rng);
  double previous = std::numeric_limits<double>::infinity();
  for (double lambda : {1.0, 10.0, 100.0}) {
    const double norm = train_ud_ldl(x, d, lambda).theta.norm();
    EXPECT_LT(norm, previous) << "lambda " << lambda;
    previous = norm;
  }
}

TEST(TrainUdLdl, SingularNormalEquations) {
  Matrix x(3, 2);
  x << 1, 2, 2, 4, 3, 6;  // rank one
  const Matrix d = Matrix::Constant(3, 2, 0.5);
  try {
    train_ud_ldl(x, d, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::singular_normal_equations);
  }
}

TEST(Objective, Examples) {
  std::mt19937_64 rng(3);
  const Matrix x = random_matrix(5, 3, rng);
  const Matrix d = random_simplex_rows(5, 2, rng);
  EXPECT_DOUBLE_EQ(ldl_objective(x, d, Matrix::Zero(3, 2), {0.0, 0.7}), d.squaredNorm());
  const Matrix eye = Matrix::Identity(3, 3);
  EXPECT_DOUBLE_EQ(ldl_objective(eye, eye, eye, {1.0, 1.0}), 3.0);
}

TEST(Objective, NaiveLoops) {
  std::mt19937_64 rng(4);
  const Matrix x = random_matrix(7, 3, rng);
  const Matrix d = random_simplex_rows(7, 2, rng);
  const Matrix theta = random_matrix(3, 2, rng);
  const LdlHyper hyper{0.3, 0.2};
  double map = 0.0, rec = 0.0, norm = 0.0;
  for (Index i = 0; i < 7; ++i) {
    for (Index j = 0; j < 2; ++j) {
      double acc = 0.0;
      for (Index k = 0; k < 3; ++k) acc += x(i, k) * theta(k, j);
      map += (acc - d(i, j)) * (acc - d(i, j));
    }
    for (Index k = 0; k < 3; ++k) {
      double acc = 0.0;
      for (Index j = 0; j < 2; ++j) acc += d(i, j) * theta(k, j);
      rec += (x(i, k) - acc) * (x(i, k) - acc);
    }
  }
  for (Index k = 0; k < 3; ++k)
    for (Index j = 0; j < 2; ++j) norm += theta(k, j) * theta(k, j);
  EXPECT_NEAR(ldl_objective(x, d, theta, hyper), map + 0.3 * rec + 0.2 * norm, 1e-12);
}

TEST(Predict, ZeroInputIsUniform) {
  LdlModel model;
  model.theta = Matrix::Ones(2, 4);
  const Matrix out = predict_ldl(model, Matrix::Zero(3, 2));
  EXPECT_TRUE((out.array() == 0.25).all());
}

TEST(Predict, IdentityPassesThrough) {
  LdlModel model;
  model.theta = Matrix::Identity(2, 2);
  Matrix x(1, 2);
  x << 0.2, 0.8;
  EXPECT_LT(max_abs_diff(predict_ldl(model, x), x), 1e-15);
}

TEST(Predict, RepairsNegativeOutput) {
  LdlModel model;
  model.theta = Matrix::Identity(3, 3);
  Matrix x(1, 3);
  x << 0.5, -0.1, 0.8;
  const Matrix out = predict_ldl(model, x);
  EXPECT_NEAR(out(0, 0), 0.5 / 1.3, 1e-9);
  EXPECT_NEAR(out(0, 1), 0.0, 1e-9);
  EXPECT_NEAR(out(0, 2), 0.8 / 1.3, 1e-9);
}

TEST(Predict, OutputsAreDistributions) {
  std::mt19937_64 rng(9);
  const Matrix x = random_matrix(40, 5, rng);
  const Matrix d = random_simplex_rows(40, 4, rng);
  const LdlModel model = train_bd_ldl(x, d);
  const Matrix out = predict_ldl(model, random_matrix(30, 5, rng));
  for (Index i = 0; i < out.rows(); ++i) {
    EXPECT_NEAR(out.row(i).sum(), 1.0, 1e-9);
    EXPECT_GE(out.row(i).minCoeff(), 0.0);
    EXPECT_LE(out.row(i).maxCoeff(), 1.0);
  }
  EXPECT_THROW(predict_ldl(model, random_matrix(3, 4, rng)), Error);
}

TEST(Options, BiasAndStandardization) {
  std::mt19937_64 rng(10);
  Matrix x = random_matrix(50, 3, rng);
  x.col(0).array() += 100.0;
  x.col(2).setConstant(4.0);
  const Matrix d = random_simplex_rows(50, 3, rng);
  const LdlModel model = train_bd_ldl(x, d, {}, {true, true});
  EXPECT_EQ(model.theta.rows(), 4);
  EXPECT_EQ(model.input_dim(), 3);
  ASSERT_TRUE(model.standardize.has_value());
  EXPECT_NEAR(model.standardize->mean(0), x.col(0).mean(), 1e-12);
  EXPECT_EQ(model.standardize->scale(2), 1.0);
  const Matrix z = detail::transform_features(x, true, model.standardize);
  EXPECT_LT(z.col(0).mean(), 1e-12);
  EXPECT_NEAR(std::sqrt(z.col(0).array().square().mean()), 1.0, 1e-12);
  EXPECT_TRUE((z.col(3).array() == 1.0).all());
}

TEST(ModelFile, RoundTrip) {
  std::mt19937_64 rng(11);
  const Matrix x = random_matrix(30, 4, rng);
  const Matrix d = random_simplex_rows(30, 3, rng);
  for (const LdlOptions options : {LdlOptions{}, LdlOptions{true, false}, LdlOptions{true, true}}) {
    const LdlModel model = train_bd_ldl(x, d, {}, options);
    std::stringstream ss;
    write_ldl_model(ss, model);
    const std::string text = ss.str();
    EXPECT_EQ(text.rfind("LDL-MODEL " + std::to_string(model.theta.rows()) + " 3 " + (options.bias ? "1" : "0"), 0), 0u);
    EXPECT_NE(text.find('e'), std::string::npos);
    const LdlModel back = read_ldl_model(ss);
    EXPECT_EQ(back.theta, model.theta);
    EXPECT_EQ(back.bias_added, model.bias_added);
    EXPECT_EQ(back.standardize.has_value(), model.standardize.has_value());
    EXPECT_EQ(predict_ldl(back, x), predict_ldl(model, x));
  }
}

TEST(ModelFile, RejectsMalformed) {
  for (const char* text : {"", "LDL-MODEL 2 2", "LE-MODEL 2 2 0\n1 2\n3 4\n", "LDL-MODEL 2 2 0\n1 2\n3\n",
                           "LDL-MODEL 1 1 0\n1\nEXTRA 3\n"}) {
    std::istringstream in(text);
    try {
      read_ldl_model(in);
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::parse_error);
    }
  }
}

}  // namespace
}  // namespace bdl
