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

/// \file experiments.hpp
///
/// Evaluation protocol: k-fold cross-validation for distribution learning,
/// single-pass evaluation for label enhancement, the enhancement-then-learning
/// pipeline, grid search and two-parameter sweeps.

#include "bdl/harness/dataset.hpp"
#include "bdl/harness/report.hpp"
#include "bdl/ldl.hpp"
#include "bdl/le.hpp"
#include "bdl/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bdl {

enum class Method { bd_ldl, ud_ldl, bd_le, ud_le };

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::bd_ldl: return "bd-ldl";
    case Method::ud_ldl: return "ud-ldl";
    case Method::bd_le: return "bd-le";
    case Method::ud_le: return "ud-le";
  }
  return "unknown";
}

inline std::optional<Method> parse_method(std::string_view s) {
  for (Method m : {Method::bd_ldl, Method::ud_ldl, Method::bd_le, Method::ud_le})
    if (method_name(m) == s) return m;
  return std::nullopt;
}

inline bool is_ldl(Method m) { return m == Method::bd_ldl || m == Method::ud_ldl; }

/// Hyperparameters of every method; each method reads its own fields.
struct MethodHyper {
  LdlHyper ldl{};  // bd-ldl; ud-ldl uses ldl.lambda2 as its ridge weight
  LdlOptions options{};
  LeHyper le{};  // bd-le; ud-le uses le.lambda with alpha forced to 0
};

/// Names of the tunable parameters of `m`, in grid order.
inline std::vector<std::string_view> param_names(Method m) {
  switch (m) {
    case Method::bd_ldl: return {"lambda1", "lambda2"};
    case Method::ud_ldl: return {"lambda2"};
    case Method::bd_le: return {"alpha", "lambda"};
    case Method::ud_le: return {"lambda"};
  }
  return {};
}

inline void set_param(MethodHyper& h, Method m, std::size_t which, double value) {
  require(which < param_names(m).size(), Errc::invalid_argument,
          std::string(method_name(m)) + " has no parameter #" + std::to_string(which + 1));
  switch (m) {
    case Method::bd_ldl: (which == 0 ? h.ldl.lambda1 : h.ldl.lambda2) = value; break;
    case Method::ud_ldl: h.ldl.lambda2 = value; break;
    case Method::bd_le: (which == 0 ? h.le.alpha : h.le.lambda) = value; break;
    case Method::ud_le: h.le.lambda = value; break;
  }
}

inline double get_param(const MethodHyper& h, Method m, std::size_t which) {
  switch (m) {
    case Method::bd_ldl: return which == 0 ? h.ldl.lambda1 : h.ldl.lambda2;
    case Method::ud_ldl: return h.ldl.lambda2;
    case Method::bd_le: return which == 0 ? h.le.alpha : h.le.lambda;
    case Method::ud_le: return h.le.lambda;
  }
  return 0.0;
}

inline void append_hyper_metadata(EvalReport& report, Method m, const MethodHyper& h) {
  const auto names = param_names(m);
  for (std::size_t i = 0; i < names.size(); ++i) report.metadata.emplace_back(std::string(names[i]), get_param(h, m, i));
  if (is_ldl(m)) {
    report.metadata.emplace_back("bias", h.options.bias);
    report.metadata.emplace_back("standardize", h.options.standardize);
  } else {
    report.metadata.emplace_back("knn", static_cast<std::int64_t>(h.le.k));
    report.metadata.emplace_back("map", std::string(map_kind_name(h.le.map)));
  }
}

struct Fold {
  std::vector<Index> train;
  std::vector<Index> test;
};

/// Seeded shuffle split into `folds` parts; the first n % folds folds get one
/// extra index. Index lists are sorted.
inline std::vector<Fold> kfold_split(Index n, int folds, std::uint64_t seed) {
  require(folds >= 2, Errc::invalid_argument, "kfold_split: need at least 2 folds");
  require(folds <= n, Errc::too_few_samples,
          "kfold_split: " + std::to_string(n) + " samples cannot fill " + std::to_string(folds) + " folds");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<Fold> out(static_cast<std::size_t>(folds));
  const Index base = n / folds;
  const Index extra = n % folds;
  Index pos = 0;
  for (Index f = 0; f < folds; ++f) {
    const Index size = base + (f < extra ? 1 : 0);
    auto& test = out[static_cast<std::size_t>(f)].test;
    test.assign(perm.begin() + pos, perm.begin() + pos + size);
    std::sort(test.begin(), test.end());
    pos += size;
  }
  for (auto& fold : out) {
    std::vector<char> in_test(static_cast<std::size_t>(n), 0);
    for (Index i : fold.test) in_test[static_cast<std::size_t>(i)] = 1;
    for (Index i = 0; i < n; ++i)
      if (!in_test[static_cast<std::size_t>(i)]) fold.train.push_back(i);
  }
  return out;
}

inline LdlModel train_ldl_method(Method m, const Matrix& x, const Matrix& d, const MethodHyper& h) {
  require(is_ldl(m), Errc::invalid_argument, std::string(method_name(m)) + " is not a distribution learner");
  return m == Method::bd_ldl ? train_bd_ldl(x, d, h.ldl, h.options) : train_ud_ldl(x, d, h.ldl.lambda2, h.options);
}

inline LeModel train_le_method(Method m, const Matrix& x, const Matrix& l, const MethodHyper& h) {
  require(!is_ldl(m), Errc::invalid_argument, std::string(method_name(m)) + " is not a label enhancer");
  return m == Method::bd_le ? train_bd_le(x, l, h.le) : train_ud_le(x, l, h.le.lambda, h.le);
}

namespace detail {

inline EvalReport base_report(std::string command, int folds, std::uint64_t seed, std::span<const Metric> metrics) {
  EvalReport r;
  r.command = std::move(command);
  r.folds = folds;
  r.seed = seed;
  if (!metrics.empty()) r.metrics.assign(metrics.begin(), metrics.end());
  return r;
}

inline ReportRow make_row(std::string method, std::string dataset, std::vector<MetricValues> folds, bool keep_folds) {
  ReportRow row;
  row.method = std::move(method);
  row.dataset = std::move(dataset);
  row.metrics = summarize(folds);
  if (keep_folds) row.folds = std::move(folds);
  return row;
}

}  // namespace detail

/// k-fold cross-validation of a distribution learner.
inline EvalReport run_cv(const Dataset& ds, Method method, const MethodHyper& hyper, int folds, std::uint64_t seed,
                         std::span<const Metric> metrics = {}) {
  require(ds.d.has_value(), Errc::invariant_violation, "cross-validation needs label distributions");
  EvalReport report = detail::base_report("cv", folds, seed, metrics);
  append_hyper_metadata(report, method, hyper);

  std::vector<MetricValues> per_fold;
  for (const Fold& fold : kfold_split(ds.n(), folds, seed)) {
    const Dataset train = subset(ds, fold.train);
    const Dataset test = subset(ds, fold.test);
    const LdlModel model = train_ldl_method(method, train.x, *train.d, hyper);
    per_fold.push_back(evaluate_all(*test.d, predict_ldl(model, test.x)));
  }
  report.rows.push_back(detail::make_row(std::string(method_name(method)), ds.name, std::move(per_fold), true));
  return report;
}

inline constexpr std::string_view kLogicalBaseline = "logical-normalized";

/// Single-pass label enhancement: recover distributions for the whole set and
/// score them against the ground truth. Includes the row-normalized logical
/// labels as a baseline row.
inline EvalReport run_le(const Dataset& ds, Method method, const MethodHyper& hyper,
                         std::span<const Metric> metrics = {}) {
  require(ds.d.has_value(), Errc::invariant_violation, "enhancement evaluation needs ground-truth distributions");
  EvalReport report = detail::base_report("enhance", 0, 0, metrics);
  append_hyper_metadata(report, method, hyper);

  const Matrix logical = logical_labels(ds);
  const LeModel model = train_le_method(method, ds.x, logical, hyper);
  report.metadata.emplace_back("optimizer_status", std::string(status_name(model.info.status)));
  report.metadata.emplace_back("iterations", static_cast<std::int64_t>(model.info.iterations));
  report.rows.push_back(
      detail::make_row(std::string(method_name(method)), ds.name, {evaluate_all(*ds.d, recover(model, ds.x))}, false));
  report.rows.push_back(
      detail::make_row(std::string(kLogicalBaseline), ds.name, {evaluate_all(*ds.d, normalize_logical(logical))}, false));
  return report;
}

/// Per fold: BD-LDL trained on the true distributions ("ground_truth") versus
/// BD-LDL trained on distributions recovered by BD-LE from the logical labels
/// of the same training split ("recovered"). Both are scored on the test
/// split's true distributions.
inline EvalReport pipeline_le_ldl(const Dataset& ds, const LeHyper& le_hyper, const LdlHyper& ldl_hyper, int folds,
                                  std::uint64_t seed, const LdlOptions& options = {}) {
  require(ds.d.has_value(), Errc::invariant_violation, "pipeline needs ground-truth distributions");
  const Matrix logical = logical_labels(ds);
  EvalReport report = detail::base_report("pipeline", folds, seed, {});
  report.metadata.emplace_back("alpha", le_hyper.alpha);
  report.metadata.emplace_back("lambda", le_hyper.lambda);
  report.metadata.emplace_back("knn", static_cast<std::int64_t>(le_hyper.k));
  report.metadata.emplace_back("map", std::string(map_kind_name(le_hyper.map)));
  report.metadata.emplace_back("lambda1", ldl_hyper.lambda1);
  report.metadata.emplace_back("lambda2", ldl_hyper.lambda2);

  std::vector<MetricValues> truth_scores, recovered_scores;
  for (const Fold& fold : kfold_split(ds.n(), folds, seed)) {
    const Dataset train = subset(ds, fold.train);
    const Dataset test = subset(ds, fold.test);
    const Matrix train_logical = logical(fold.train, Eigen::placeholders::all);

    const LdlModel on_truth = train_bd_ldl(train.x, *train.d, ldl_hyper, options);
    truth_scores.push_back(evaluate_all(*test.d, predict_ldl(on_truth, test.x)));

    const LeModel enhancer = train_bd_le(train.x, train_logical, le_hyper);
    const Matrix recovered = recover(enhancer, train.x);
    const LdlModel on_recovered = train_bd_ldl(train.x, recovered, ldl_hyper, options);
    recovered_scores.push_back(evaluate_all(*test.d, predict_ldl(on_recovered, test.x)));
  }
  report.rows.push_back(detail::make_row("ground_truth", ds.name, std::move(truth_scores), true));
  report.rows.push_back(detail::make_row("recovered", ds.name, std::move(recovered_scores), true));
  return report;
}

/// Default tuning range 10^-4 .. 10^3.
inline std::vector<double> default_grid() {
  return {1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1, 1e2, 1e3};
}

struct GridPoint {
  std::vector<double> params;  // one value per param_names(method)
  MetricSummaries metrics{};
};

struct GridResult {
  Method method = Method::bd_ldl;
  Metric metric = Metric::chebyshev;
  int folds = 0;
  std::uint64_t seed = 0;
  std::vector<GridPoint> points;  // lexicographic order, first parameter outermost
  std::size_t best = 0;
  MethodHyper best_hyper{};
};

/// Scores a hyperparameter setting: CV means for learners, one pass for enhancers.
inline MetricSummaries score_setting(const Dataset& ds, Method method, const MethodHyper& h, int folds,
                                    std::uint64_t seed) {
  const EvalReport r = is_ldl(method) ? run_cv(ds, method, h, folds, seed) : run_le(ds, method, h);
  return r.rows.front().metrics;
}

/// Exhaustive search over the cross product of `grids` (one list per
/// parameter of `method`). The best point wins on `metric`; ties keep the
/// earlier point.
inline GridResult grid_search(const Dataset& ds, Method method, const std::vector<std::vector<double>>& grids,
                              int folds, std::uint64_t seed, Metric metric, const MethodHyper& base = {}) {
  const auto names = param_names(method);
  require(grids.size() == names.size(), Errc::invalid_argument,
          std::string(method_name(method)) + " takes " + std::to_string(names.size()) + " grid(s)");
  for (const auto& g : grids) require(!g.empty(), Errc::invalid_argument, "grid_search: empty grid");

  GridResult out;
  out.method = method;
  out.metric = metric;
  out.folds = is_ldl(method) ? folds : 0;
  out.seed = seed;

  std::vector<std::size_t> idx(grids.size(), 0);
  for (;;) {
    MethodHyper h = base;
    GridPoint point;
    for (std::size_t p = 0; p < grids.size(); ++p) {
      point.params.push_back(grids[p][idx[p]]);
      set_param(h, method, p, grids[p][idx[p]]);
    }
    point.metrics = score_setting(ds, method, h, folds, seed);
    const auto k = metric_index(metric);
    if (out.points.empty() || better(point.metrics[k].mean, out.points[out.best].metrics[k].mean, direction(metric))) {
      out.best = out.points.size();
      out.best_hyper = h;
    }
    out.points.push_back(std::move(point));

    std::size_t p = grids.size();
    while (p > 0) {
      --p;
      if (++idx[p] < grids[p].size()) break;
      idx[p] = 0;
      if (p == 0) return out;
    }
  }
}

inline std::string to_json(const GridResult& g) {
  const auto names = param_names(g.method);
  JsonWriter w;
  w.begin_object();
  w.field("command", "grid");
  w.key("metadata").begin_object();
  w.field("method", std::string(method_name(g.method)));
  w.field("metric", std::string(metric_name(g.metric)));
  w.field("seed", g.seed);
  w.field("folds", g.folds);
  w.field("std", "population");
  w.end_object();
  w.key("best").begin_object();
  for (std::size_t p = 0; p < names.size(); ++p) w.field(names[p], g.points[g.best].params[p]);
  w.field("mean", g.points[g.best].metrics[metric_index(g.metric)].mean);
  w.field("std", g.points[g.best].metrics[metric_index(g.metric)].stddev);
  w.end_object();
  w.key("grid").begin_array();
  for (const auto& point : g.points) {
    w.begin_object();
    for (std::size_t p = 0; p < names.size(); ++p) w.field(names[p], point.params[p]);
    w.key("metrics").begin_object();
    for (Metric m : kAllMetrics) {
      w.key(metric_name(m)).begin_object();
      w.field("mean", point.metrics[metric_index(m)].mean);
      w.field("std", point.metrics[metric_index(m)].stddev);
      w.end_object();
    }
    w.end_object();
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

inline std::string to_csv(const GridResult& g) {
  std::string out;
  for (auto name : param_names(g.method)) out += std::string(name) + ",";
  const std::string metric(metric_name(g.metric));
  out += metric + "_mean," + metric + "_std,best\n";
  for (std::size_t i = 0; i < g.points.size(); ++i) {
    for (double v : g.points[i].params) out += format_csv_number(v) + ",";
    const auto& s = g.points[i].metrics[metric_index(g.metric)];
    out += format_csv_number(s.mean) + "," + format_csv_number(s.stddev) + "," + (i == g.best ? "1" : "0") + "\n";
  }
  return out;
}

struct SweepResult {
  Method method = Method::bd_ldl;
  Metric metric = Metric::chebyshev;
  std::vector<double> rows;  // first parameter
  std::vector<double> cols;  // second parameter
  Matrix scores;             // rows.size() x cols.size() metric means
};

/// Full cross product of two parameter ranges for a two-parameter method.
inline SweepResult param_sweep(const Dataset& ds, Method method, const std::vector<double>& first,
                               const std::vector<double>& second, Metric metric, int folds, std::uint64_t seed,
                               const MethodHyper& base = {}) {
  require(param_names(method).size() == 2, Errc::invalid_argument,
          std::string(method_name(method)) + " does not have two parameters to sweep");
  require(!first.empty() && !second.empty(), Errc::invalid_argument, "param_sweep: empty range");
  SweepResult out;
  out.method = method;
  out.metric = metric;
  out.rows = first;
  out.cols = second;
  out.scores.resize(static_cast<Index>(first.size()), static_cast<Index>(second.size()));
  for (std::size_t i = 0; i < first.size(); ++i) {
    for (std::size_t j = 0; j < second.size(); ++j) {
      MethodHyper h = base;
      set_param(h, method, 0, first[i]);
      set_param(h, method, 1, second[j]);
      out.scores(static_cast<Index>(i), static_cast<Index>(j)) =
          score_setting(ds, method, h, folds, seed)[metric_index(metric)].mean;
    }
  }
  return out;
}

/// Header row holds the second parameter's values; the first column the first's.
inline std::string to_csv(const SweepResult& s) {
  const auto names = param_names(s.method);
  std::string out = std::string(names[0]) + "\\" + std::string(names[1]);
  for (double v : s.cols) out += "," + format_csv_number(v);
  out += '\n';
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    out += format_csv_number(s.rows[i]);
    for (std::size_t j = 0; j < s.cols.size(); ++j)
      out += "," + format_csv_number(s.scores(static_cast<Index>(i), static_cast<Index>(j)));
    out += '\n';
  }
  return out;
}

}  // namespace bdl
