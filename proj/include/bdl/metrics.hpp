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

/// \file metrics.hpp
///
/// Distance and similarity measures between label distributions, and the
/// per-dataset ranking used to summarize method comparisons.

#include "bdl/common.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

namespace bdl {

enum class Metric { chebyshev, clark, canberra, kl, cosine, intersection };
enum class Direction { lower_better, higher_better };

inline constexpr std::array<Metric, 6> kAllMetrics = {Metric::chebyshev, Metric::clark,  Metric::canberra,
                                                      Metric::kl,        Metric::cosine, Metric::intersection};

inline constexpr std::size_t metric_index(Metric m) { return static_cast<std::size_t>(m); }

inline constexpr Direction direction(Metric m) {
  return (m == Metric::cosine || m == Metric::intersection) ? Direction::higher_better : Direction::lower_better;
}

inline constexpr std::string_view metric_name(Metric m) {
  constexpr std::array<std::string_view, 6> names = {"chebyshev", "clark", "canberra", "kl", "cosine", "intersection"};
  return names[metric_index(m)];
}

inline std::optional<Metric> parse_metric(std::string_view s) {
  for (Metric m : kAllMetrics)
    if (metric_name(m) == s) return m;
  return std::nullopt;
}

/// True when `a` is a strictly better score than `b` under `dir`.
inline bool better(double a, double b, Direction dir) { return dir == Direction::lower_better ? a < b : a > b; }

namespace detail {

template <class A, class B>
void check_pair(const Eigen::DenseBase<A>& d, const Eigen::DenseBase<B>& dhat) {
  require(d.size() == dhat.size(), Errc::dimension_mismatch,
          "metric: lengths " + std::to_string(d.size()) + " and " + std::to_string(dhat.size()));
  require(d.derived().allFinite() && dhat.derived().allFinite(), Errc::non_finite, "metric: non-finite entry");
}

}  // namespace detail

template <class A, class B>
double chebyshev(const Eigen::DenseBase<A>& d, const Eigen::DenseBase<B>& dhat) {
  detail::check_pair(d, dhat);
  double out = 0.0;
  for (Index i = 0; i < d.size(); ++i) out = std::max(out, std::abs(d(i) - dhat(i)));
  return out;
}

template <class A, class B>
double clark(const Eigen::DenseBase<A>& d, const Eigen::DenseBase<B>& dhat) {
  detail::check_pair(d, dhat);
  double sum = 0.0;
  for (Index i = 0; i < d.size(); ++i) {
    const double num = d(i) - dhat(i);
    const double den = std::max(d(i) + dhat(i), kProbabilityFloor);
    sum += (num * num) / (den * den);
  }
  return std::sqrt(sum);
}

template <class A, class B>
double canberra(const Eigen::DenseBase<A>& d, const Eigen::DenseBase<B>& dhat) {
  detail::check_pair(d, dhat);
  double sum = 0.0;
  for (Index i = 0; i < d.size(); ++i) sum += std::abs(d(i) - dhat(i)) / std::max(d(i) + dhat(i), kProbabilityFloor);
  return sum;
}

/// KL(d || dhat); both arguments of the logarithm are floored at 1e-12.
template <class A, class B>
double kl(const Eigen::DenseBase<A>& d, const Eigen::DenseBase<B>& dhat) {
  detail::check_pair(d, dhat);
  double sum = 0.0;
  for (Index i = 0; i < d.size(); ++i) {
    if (d(i) == 0.0) continue;
    sum += d(i) * std::log(std::max(d(i), kProbabilityFloor) / std::max(dhat(i), kProbabilityFloor));
  }
  return sum;
}

template <class A, class B>
double cosine(const Eigen::DenseBase<A>& d, const Eigen::DenseBase<B>& dhat) {
  detail::check_pair(d, dhat);
  double dot = 0.0, nd = 0.0, nh = 0.0;
  for (Index i = 0; i < d.size(); ++i) {
    dot += d(i) * dhat(i);
    nd += d(i) * d(i);
    nh += dhat(i) * dhat(i);
  }
  return dot / std::max(std::sqrt(nd * nh), kProbabilityFloor);
}

template <class A, class B>
double intersection(const Eigen::DenseBase<A>& d, const Eigen::DenseBase<B>& dhat) {
  detail::check_pair(d, dhat);
  double sum = 0.0;
  for (Index i = 0; i < d.size(); ++i) sum += std::min(d(i), dhat(i));
  return sum;
}

using MetricValues = std::array<double, 6>;  // indexed by metric_index

template <class A, class B>
MetricValues evaluate_pair(const Eigen::DenseBase<A>& d, const Eigen::DenseBase<B>& dhat) {
  return {chebyshev(d, dhat), clark(d, dhat), canberra(d, dhat), kl(d, dhat), cosine(d, dhat), intersection(d, dhat)};
}

/// Mean of every metric over paired rows.
inline MetricValues evaluate_all(const Matrix& truth, const Matrix& predicted) {
  require(truth.rows() > 0, Errc::empty_input, "evaluate_all: no rows");
  require_same_shape(truth, predicted, "evaluate_all");
  MetricValues sum{};
  for (Index i = 0; i < truth.rows(); ++i) {
    const MetricValues row = evaluate_pair(truth.row(i), predicted.row(i));
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += row[k];
  }
  for (double& v : sum) v /= static_cast<double>(truth.rows());
  return sum;
}

struct RankTable {
  std::vector<std::vector<int>> ranks;  // [method][dataset]
  std::vector<double> avg_rank;         // [method]
};

/// Ranks methods within each dataset (1 = best). Tied scores share the
/// smaller rank, so scores {0.1, 0.1, 0.2} rank as {1, 1, 3}.
inline RankTable rank_table(const std::vector<std::vector<double>>& scores, Direction dir) {
  RankTable out;
  const std::size_t methods = scores.size();
  const std::size_t datasets = methods ? scores.front().size() : 0;
  for (const auto& row : scores)
    require(row.size() == datasets, Errc::dimension_mismatch, "rank_table: ragged score table");
  out.ranks.assign(methods, std::vector<int>(datasets, 1));
  out.avg_rank.assign(methods, 0.0);
  for (std::size_t ds = 0; ds < datasets; ++ds) {
    for (std::size_t m = 0; m < methods; ++m) {
      int rank = 1;
      for (std::size_t other = 0; other < methods; ++other)
        if (better(scores[other][ds], scores[m][ds], dir)) ++rank;
      out.ranks[m][ds] = rank;
    }
  }
  for (std::size_t m = 0; m < methods; ++m) {
    double sum = 0.0;
    for (int r : out.ranks[m]) sum += r;
    out.avg_rank[m] = datasets ? sum / static_cast<double>(datasets) : 0.0;
  }
  return out;
}

inline std::string format_avg_rank(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace bdl
