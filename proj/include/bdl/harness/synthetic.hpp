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

#include "bdl/harness/dataset.hpp"
#include "bdl/le.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace bdl {

struct SyntheticSpec {
  Index n = 200;
  Index m = 24;
  Index c = 4;
  double noise = 0.1;
  std::uint64_t seed = 1;
  Index manifold_clusters = 3;
};

inline void validate(const SyntheticSpec& spec) {
  require(spec.n >= 1 && spec.m >= 1, Errc::invalid_argument, "synthetic: n and m must be positive");
  require(spec.c >= 2, Errc::invalid_argument, "synthetic: need at least two labels");
  require(spec.noise >= 0.0, Errc::invalid_argument, "synthetic: noise must be >= 0");
  require(spec.manifold_clusters >= 1, Errc::invalid_argument, "synthetic: need at least one cluster");
}

/// Clustered Gaussian features with distributions from a planted linear model:
/// D = softmax(X theta* + noise * E), L = binarize(D).
///
/// Cluster centres are N(0, 2^2) per coordinate, points scatter N(0, 1) around
/// them, and features are scaled by 1/sqrt(m) so the logits stay O(1)
/// whatever the dimension.
inline Dataset gen_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&](Index rows, Index cols) {
    Matrix out(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) out(i, j) = normal(rng);
    return out;
  };

  const Matrix centers = 2.0 * gaussian(spec.manifold_clusters, spec.m);
  std::uniform_int_distribution<Index> pick(0, spec.manifold_clusters - 1);

  Dataset ds;
  ds.name = "synthetic-" + std::to_string(spec.seed);
  ds.x.resize(spec.n, spec.m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.m));
  for (Index i = 0; i < spec.n; ++i) {
    const Index cluster = pick(rng);
    for (Index j = 0; j < spec.m; ++j) ds.x(i, j) = scale * (centers(cluster, j) + normal(rng));
  }

  const Matrix theta = gaussian(spec.m, spec.c);
  Matrix logits = ds.x * theta;
  if (spec.noise > 0.0) logits += spec.noise * gaussian(spec.n, spec.c);
  Matrix d(spec.n, spec.c);
  for (Index i = 0; i < spec.n; ++i) {
    const RowVector e = (logits.row(i).array() - logits.row(i).maxCoeff()).exp().matrix();
    d.row(i) = e / e.sum();
  }
  ds.l = binarize(d);
  ds.d = std::move(d);
  return ds;
}

}  // namespace bdl
