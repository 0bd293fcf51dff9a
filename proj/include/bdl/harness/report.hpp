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

/// \file report.hpp
///
/// Evaluation reports and their JSON / CSV renderings. Field order is fixed
/// and numbers are printed with a fixed format, so identical reports always
/// serialize to identical bytes.

#include "bdl/common.hpp"
#include "bdl/metrics.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace bdl {

using MetaValue = std::variant<std::string, double, std::int64_t, bool>;

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation over folds
};

using MetricSummaries = std::array<MetricSummary, 6>;

struct ReportRow {
  std::string method;
  std::string dataset;
  MetricSummaries metrics{};
  std::vector<MetricValues> folds;  // per-fold means; empty for single-pass runs
};

struct EvalReport {
  std::string command;
  std::vector<std::pair<std::string, MetaValue>> metadata;
  std::vector<Metric> metrics{kAllMetrics.begin(), kAllMetrics.end()};
  int folds = 0;  // 0 for single-pass evaluations
  std::uint64_t seed = 0;
  std::vector<ReportRow> rows;
};

/// Mean and population standard deviation per metric.
inline MetricSummaries summarize(const std::vector<MetricValues>& values) {
  require(!values.empty(), Errc::empty_input, "summarize: no values");
  MetricSummaries out{};
  const double count = static_cast<double>(values.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    double sum = 0.0;
    for (const auto& v : values) sum += v[k];
    const double mean = sum / count;
    double sq = 0.0;
    for (const auto& v : values) sq += (v[k] - mean) * (v[k] - mean);
    out[k] = {mean, std::sqrt(sq / count)};
  }
  return out;
}

struct ReportRanks {
  std::vector<std::string> methods;   // first-appearance order
  std::vector<std::string> datasets;  // first-appearance order
  std::array<RankTable, 6> tables;    // indexed by metric_index
};

namespace detail {

template <class T>
std::size_t index_of(std::vector<T>& list, const T& value) {
  for (std::size_t i = 0; i < list.size(); ++i)
    if (list[i] == value) return i;
  list.push_back(value);
  return list.size() - 1;
}

}  // namespace detail

/// Ranks every method against the others on each dataset, per metric.
inline ReportRanks compute_ranks(const EvalReport& report) {
  ReportRanks out;
  for (const auto& row : report.rows) {
    detail::index_of(out.methods, row.method);
    detail::index_of(out.datasets, row.dataset);
  }
  std::vector<std::vector<const ReportRow*>> cell(out.methods.size(),
                                                  std::vector<const ReportRow*>(out.datasets.size(), nullptr));
  for (const auto& row : report.rows) {
    cell[detail::index_of(out.methods, row.method)][detail::index_of(out.datasets, row.dataset)] = &row;
  }
  for (std::size_t mi = 0; mi < out.methods.size(); ++mi)
    for (std::size_t di = 0; di < out.datasets.size(); ++di)
      require(cell[mi][di] != nullptr, Errc::invariant_violation,
              "report has no row for method '" + out.methods[mi] + "' on '" + out.datasets[di] + "'");
  for (Metric metric : kAllMetrics) {
    std::vector<std::vector<double>> scores(out.methods.size(), std::vector<double>(out.datasets.size()));
    for (std::size_t mi = 0; mi < out.methods.size(); ++mi)
      for (std::size_t di = 0; di < out.datasets.size(); ++di)
        scores[mi][di] = cell[mi][di]->metrics[metric_index(metric)].mean;
    out.tables[metric_index(metric)] = rank_table(scores, direction(metric));
  }
  return out;
}

/// Minimal streaming JSON writer with two-space indentation.
class JsonWriter {
 public:
  std::string str() const { return out_; }

  JsonWriter& begin_object() { return open('{'); }
  JsonWriter& end_object() { return close('}'); }
  JsonWriter& begin_array() { return open('['); }
  JsonWriter& end_array() { return close(']'); }

  JsonWriter& key(std::string_view k) {
    separate();
    out_ += quote(k);
    out_ += ": ";
    pending_key_ = true;
    return *this;
  }

  JsonWriter& value(std::string_view s) { return raw(quote(s)); }
  JsonWriter& value(const char* s) { return value(std::string_view(s)); }
  JsonWriter& value(const std::string& s) { return value(std::string_view(s)); }
  JsonWriter& value(bool b) { return raw(b ? "true" : "false"); }
  JsonWriter& value(std::int64_t v) { return raw(std::to_string(v)); }
  JsonWriter& value(std::uint64_t v) { return raw(std::to_string(v)); }
  JsonWriter& value(int v) { return raw(std::to_string(v)); }
  JsonWriter& value(double v) { return raw(std::isfinite(v) ? format_g17(v) : "null"); }
  JsonWriter& value(const MetaValue& v) {
    std::visit([this](const auto& x) { value(x); }, v);
    return *this;
  }

  template <class T>
  JsonWriter& field(std::string_view k, const T& v) {
    key(k);
    return value(v);
  }

 private:
  JsonWriter& open(char c) {
    separate();
    out_ += c;
    first_.push_back(true);
    return *this;
  }
  JsonWriter& close(char c) {
    const bool empty = first_.back();
    first_.pop_back();
    if (!empty) newline();
    out_ += c;
    if (first_.empty()) out_ += '\n';
    return *this;
  }
  JsonWriter& raw(const std::string& s) {
    separate();
    out_ += s;
    return *this;
  }
  void separate() {
    if (pending_key_) {
      pending_key_ = false;
      return;
    }
    if (first_.empty()) return;
    if (!first_.back()) out_ += ',';
    first_.back() = false;
    newline();
  }
  void newline() {
    out_ += '\n';
    out_.append(2 * first_.size(), ' ');
  }
  static std::string quote(std::string_view s) {
    std::string q = "\"";
    for (char ch : s) {
      switch (ch) {
        case '"': q += "\\\""; break;
        case '\\': q += "\\\\"; break;
        case '\n': q += "\\n"; break;
        case '\t': q += "\\t"; break;
        default:
          if (static_cast<unsigned char>(ch) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", ch);
            q += buf;
          } else {
            q += ch;
          }
      }
    }
    q += '"';
    return q;
  }

  std::string out_;
  std::vector<bool> first_;
  bool pending_key_ = false;
};

inline void write_metadata(JsonWriter& w, const EvalReport& report) {
  w.field("command", report.command);
  w.key("metadata").begin_object();
  w.field("seed", report.seed);
  w.field("folds", report.folds);
  w.field("std", "population");
  for (const auto& [k, v] : report.metadata) w.field(k, v);
  w.end_object();
}

inline std::string to_json(const EvalReport& report) {
  const ReportRanks ranks = compute_ranks(report);
  JsonWriter w;
  w.begin_object();
  write_metadata(w, report);

  w.key("results").begin_array();
  for (const auto& row : report.rows) {
    std::size_t mi = 0, di = 0;
    for (; ranks.methods[mi] != row.method; ++mi) {}
    for (; ranks.datasets[di] != row.dataset; ++di) {}
    w.begin_object();
    w.field("method", row.method);
    w.field("dataset", row.dataset);
    w.key("metrics").begin_object();
    for (Metric metric : report.metrics) {
      const auto k = metric_index(metric);
      w.key(metric_name(metric)).begin_object();
      w.field("mean", row.metrics[k].mean);
      w.field("std", row.metrics[k].stddev);
      w.field("rank", ranks.tables[k].ranks[mi][di]);
      w.end_object();
    }
    w.end_object();
    if (!row.folds.empty()) {
      w.key("folds").begin_array();
      for (const auto& fold : row.folds) {
        w.begin_object();
        for (Metric metric : report.metrics) w.field(metric_name(metric), fold[metric_index(metric)]);
        w.end_object();
      }
      w.end_array();
    }
    w.end_object();
  }
  w.end_array();

  w.key("avg_rank").begin_object();
  for (std::size_t mi = 0; mi < ranks.methods.size(); ++mi) {
    w.key(ranks.methods[mi]).begin_object();
    for (Metric metric : report.metrics) {
      w.field(metric_name(metric), format_avg_rank(ranks.tables[metric_index(metric)].avg_rank[mi]));
    }
    w.end_object();
  }
  w.end_object();
  w.end_object();
  return w.str();
}

inline std::string format_csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// One line per (method, dataset): mean, std and rank of each metric.
inline std::string to_csv(const EvalReport& report) {
  const ReportRanks ranks = compute_ranks(report);
  std::string out = "method,dataset";
  for (Metric metric : report.metrics) {
    const std::string name(metric_name(metric));
    out += "," + name + "_mean," + name + "_std," + name + "_rank";
  }
  out += '\n';
  for (const auto& row : report.rows) {
    std::size_t mi = 0, di = 0;
    for (; ranks.methods[mi] != row.method; ++mi) {}
    for (; ranks.datasets[di] != row.dataset; ++di) {}
    out += row.method + "," + row.dataset;
    for (Metric metric : report.metrics) {
      const auto k = metric_index(metric);
      out += "," + format_csv_number(row.metrics[k].mean) + "," + format_csv_number(row.metrics[k].stddev) + "," +
             std::to_string(ranks.tables[k].ranks[mi][di]);
    }
    out += '\n';
  }
  return out;
}

enum class ReportFormat { json, csv };

inline std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  return std::nullopt;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::io_error, "write failed for " + path.string());
}

inline std::string render(const EvalReport& report, ReportFormat format) {
  return format == ReportFormat::json ? to_json(report) : to_csv(report);
}

inline void emit_report(const EvalReport& report, ReportFormat format, const std::filesystem::path& path) {
  write_text_file(path, render(report, format));
}

}  // namespace bdl
