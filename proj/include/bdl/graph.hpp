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

/// \file graph.hpp
///
/// K-nearest-neighbour similarity graph, its Laplacian-like matrix and the
/// explicit feature maps used by label enhancement.

#include "bdl/common.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace bdl {

using NeighborLists = std::vector<std::vector<Index>>;

/// k nearest rows of `x` for every row, by Euclidean distance, nearest first.
/// Ties go to the smaller index.
inline NeighborLists knn_neighbors(const Matrix& x, Index k) {
  const Index n = x.rows();
  require(k >= 1, Errc::invalid_argument, "knn_neighbors: k must be positive");
  require(k < n, Errc::k_too_large,
          "knn_neighbors: k=" + std::to_string(k) + " needs more than " + std::to_string(n) + " rows");
  require_finite(x, "knn_neighbors features");

  NeighborLists out(static_cast<std::size_t>(n));
  std::vector<std::pair<double, Index>> dist;
  dist.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    dist.clear();
    for (Index j = 0; j < n; ++j) {
      if (j != i) dist.emplace_back((x.row(i) - x.row(j)).squaredNorm(), j);
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    auto& row = out[static_cast<std::size_t>(i)];
    row.reserve(static_cast<std::size_t>(k));
    for (Index t = 0; t < k; ++t) row.push_back(dist[static_cast<std::size_t>(t)].second);
  }
  return out;
}

struct SimilarityGraph {
  SparseMatrix a;  // a_ij = exp(-|x_i - x_j|^2 / (2 sigma^2)) for j in N(i)
  SparseMatrix g;  // diag((rowsum + colsum) / 2) - a
  Index k = 0;
  double sigma = 1.0;
};

/// Builds the neighbour similarity matrix and G = Ahat - A.
///
/// tr(D G D^T) equals half of sum_ij a_ij |d_i - d_j|^2 for any D with
/// instances as columns.
inline SimilarityGraph similarity_graph(const Matrix& x, Index k, double sigma = 1.0) {
  require(sigma > 0.0, Errc::invalid_argument, "similarity_graph: sigma must be positive");
  const NeighborLists neighbors = knn_neighbors(x, k);
  const Index n = x.rows();

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n * k));
  for (Index i = 0; i < n; ++i) {
    for (Index j : neighbors[static_cast<std::size_t>(i)]) {
      const double dist2 = (x.row(i) - x.row(j)).squaredNorm();
      triplets.emplace_back(i, j, std::exp(-dist2 / (2.0 * sigma * sigma)));
    }
  }

  SimilarityGraph graph;
  graph.k = k;
  graph.sigma = sigma;
  graph.a.resize(n, n);
  graph.a.setFromTriplets(triplets.begin(), triplets.end());

  Vector degree = Vector::Zero(n);
  for (Index col = 0; col < graph.a.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(graph.a, col); it; ++it) {
      degree(it.row()) += it.value() / 2.0;  // row sum contribution
      degree(it.col()) += it.value() / 2.0;  // column sum contribution
    }
  }
  // a_ii = 0, so G's diagonal is exactly the degree and its off-diagonal -a_ij.
  for (auto& t : triplets) t = Eigen::Triplet<double>(t.row(), t.col(), -t.value());
  for (Index i = 0; i < n; ++i) triplets.emplace_back(i, i, degree(i));
  graph.g.resize(n, n);
  graph.g.setFromTriplets(triplets.begin(), triplets.end());
  return graph;
}

enum class MapKind { linear, empirical_gaussian };

inline std::string_view map_kind_name(MapKind kind) {
  return kind == MapKind::linear ? "linear" : "egk";
}

inline std::optional<MapKind> parse_map_kind(std::string_view s) {
  if (s == "linear") return MapKind::linear;
  if (s == "egk" || s == "empirical-gaussian") return MapKind::empirical_gaussian;
  return std::nullopt;
}

/// Explicit feature map phi(x). The empirical Gaussian map evaluates a
/// Gaussian kernel against every stored training anchor.
struct FeatureMap {
  MapKind kind = MapKind::linear;
  Matrix anchors;  // empty for linear
  double width = 1.0;
  Index input_dim = 0;

  Index output_dim() const { return kind == MapKind::linear ? input_dim : anchors.rows(); }

  /// phi(x) for each row of `x`, returned as rows (n x p).
  Matrix apply(const Matrix& x) const {
    require(x.cols() == input_dim, Errc::dimension_mismatch,
            "FeatureMap: expected " + std::to_string(input_dim) + " features, got " + std::to_string(x.cols()));
    if (kind == MapKind::linear) return x;
    Matrix out(x.rows(), anchors.rows());
    const double denom = 2.0 * width * width;
    for (Index j = 0; j < anchors.rows(); ++j) {
      for (Index i = 0; i < x.rows(); ++i) {
        out(i, j) = std::exp(-(x.row(i) - anchors.row(j)).squaredNorm() / denom);
      }
    }
    return out;
  }
};

inline constexpr std::size_t kWidthSamplePairs = 1000;
inline constexpr std::uint64_t kWidthSampleSeed = 0x6b65726e656cULL;

/// Mean Euclidean distance over all pairs, or over kWidthSamplePairs pairs
/// drawn uniformly (fixed seed) when there are more than that.
inline double mean_pairwise_distance(const Matrix& x) {
  const Index n = x.rows();
  if (n < 2) return 0.0;
  const auto total = static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
  double sum = 0.0;
  if (total <= kWidthSamplePairs) {
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) sum += (x.row(i) - x.row(j)).norm();
    return sum / static_cast<double>(total);
  }
  std::mt19937_64 rng(kWidthSampleSeed);
  std::uniform_int_distribution<Index> first(0, n - 1);
  std::uniform_int_distribution<Index> offset(1, n - 1);
  for (std::size_t s = 0; s < kWidthSamplePairs; ++s) {
    const Index i = first(rng);
    const Index j = (i + offset(rng)) % n;
    sum += (x.row(i) - x.row(j)).norm();
  }
  return sum / static_cast<double>(kWidthSamplePairs);
}

inline FeatureMap feature_map_fit(const Matrix& x_train, MapKind kind, std::optional<double> width = std::nullopt) {
  require(x_train.rows() >= 1, Errc::empty_input, "feature_map_fit: no training rows");
  require_finite(x_train, "feature_map_fit features");
  FeatureMap map;
  map.kind = kind;
  map.input_dim = x_train.cols();
  if (kind == MapKind::linear) return map;

  map.anchors = x_train;
  if (width) {
    require(*width > 0.0, Errc::invalid_argument, "feature_map_fit: width must be positive");
    map.width = *width;
  } else {
    const double w = mean_pairwise_distance(x_train);
    map.width = w > 0.0 ? w : 1.0;  // all points identical
  }
  return map;
}

/// Phi with instances as columns and a trailing constant-one row ((p+1) x n).
inline Matrix feature_map_apply(const FeatureMap& map, const Matrix& x) {
  const Matrix mapped = map.apply(x);
  Matrix phi(mapped.cols() + 1, mapped.rows());
  phi.topRows(mapped.cols()) = mapped.transpose();
  phi.bottomRows(1).setOnes();
  return phi;
}

}  // namespace bdl
