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

/// \file dataset.hpp
///
/// Plain-text dataset files:
///
///     LDL|LLE|BOTH <n> <m> <c>
///     n rows: m features, then c distribution values (LDL), c logical
///             values (LLE), or c distribution values followed by c logical
///             values (BOTH)
///
/// Values are whitespace separated; writing uses 17 significant digits so a
/// save/load cycle reproduces every double exactly.

#include "bdl/common.hpp"
#include "bdl/le.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace bdl {

struct Dataset {
  std::string name;
  Matrix x;                 // n x m
  std::optional<Matrix> d;  // n x c distributions
  std::optional<Matrix> l;  // n x c logical labels

  Index n() const { return x.rows(); }
  Index m() const { return x.cols(); }
  Index c() const { return d ? d->cols() : (l ? l->cols() : 0); }

};

namespace detail {

inline bool same_matrix(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

inline bool same_matrix(const std::optional<Matrix>& a, const std::optional<Matrix>& b) {
  return a.has_value() == b.has_value() && (!a || same_matrix(*a, *b));
}

}  // namespace detail

/// Exact equality of names and every stored value.
inline bool operator==(const Dataset& a, const Dataset& b) {
  return a.name == b.name && detail::same_matrix(a.x, b.x) && detail::same_matrix(a.d, b.d) &&
         detail::same_matrix(a.l, b.l);
}

inline void validate(const Dataset& ds) {
  require(ds.d || ds.l, Errc::invariant_violation, "dataset has neither distributions nor logical labels");
  require_finite(ds.x, "dataset features");
  if (ds.d) {
    require(ds.d->rows() == ds.n(), Errc::dimension_mismatch, "distribution row count");
    const Index bad = first_non_simplex_row(*ds.d);
    require(bad < 0, Errc::invariant_violation,
            "distribution at row " + std::to_string(bad + 1) + " is not on the simplex");
  }
  if (ds.l) {
    require(ds.l->rows() == ds.n(), Errc::dimension_mismatch, "logical label row count");
    if (ds.d) require(ds.l->cols() == ds.d->cols(), Errc::dimension_mismatch, "label counts of D and L differ");
    validate_logical(*ds.l);
  }
}

namespace detail {

inline std::string location(std::size_t line, std::size_t column) {
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

// Splits on spaces/tabs, remembering 1-based start columns.
inline std::vector<std::pair<std::string, std::size_t>> tokenize(const std::string& line) {
  std::vector<std::pair<std::string, std::size_t>> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.emplace_back(line.substr(start, i - start), start + 1);
  }
  return out;
}

inline double parse_double(const std::string& token, std::size_t line, std::size_t column) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size()) {
    throw Error(Errc::parse_error, location(line, column) + ": '" + token + "' is not a number");
  }
  return v;
}

inline Index parse_count(const std::string& token, std::size_t line, std::size_t column) {
  char* end = nullptr;
  const long long v = std::strtoll(token.c_str(), &end, 10);
  if (token.empty() || end != token.c_str() + token.size() || v < 0) {
    throw Error(Errc::parse_error, location(line, column) + ": '" + token + "' is not a count");
  }
  return static_cast<Index>(v);
}

}  // namespace detail

inline Dataset parse_dataset(std::istream& is, std::string name = "dataset") {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };

  if (!next_line()) throw Error(Errc::parse_error, "empty file");
  const auto header = detail::tokenize(line);
  if (header.size() != 4) throw Error(Errc::parse_error, detail::location(line_no, 1) + ": expected '<LDL|LLE|BOTH> <n> <m> <c>'");
  const std::string& kind = header[0].first;
  if (kind != "LDL" && kind != "LLE" && kind != "BOTH") {
    throw Error(Errc::parse_error, detail::location(line_no, 1) + ": unknown kind '" + kind + "'");
  }
  const Index n = detail::parse_count(header[1].first, line_no, header[1].second);
  const Index m = detail::parse_count(header[2].first, line_no, header[2].second);
  const Index c = detail::parse_count(header[3].first, line_no, header[3].second);
  if (n == 0 || c == 0) throw Error(Errc::parse_error, detail::location(line_no, 1) + ": n and c must be positive");

  const bool has_d = kind != "LLE";
  const bool has_l = kind != "LDL";
  const Index width = m + (has_d ? c : 0) + (has_l ? c : 0);

  Dataset ds;
  ds.name = std::move(name);
  ds.x.resize(n, m);
  if (has_d) ds.d = Matrix(n, c);
  if (has_l) ds.l = Matrix(n, c);
  for (Index i = 0; i < n; ++i) {
    if (!next_line()) throw Error(Errc::parse_error, "expected " + std::to_string(n) + " rows, found " + std::to_string(i));
    const auto tokens = detail::tokenize(line);
    if (static_cast<Index>(tokens.size()) != width) {
      throw Error(Errc::parse_error, detail::location(line_no, tokens.empty() ? 1 : tokens.back().second) +
                                         ": expected " + std::to_string(width) + " values, found " +
                                         std::to_string(tokens.size()));
    }
    Index t = 0;
    auto value = [&]() {
      const auto& [tok, col] = tokens[static_cast<std::size_t>(t++)];
      return detail::parse_double(tok, line_no, col);
    };
    for (Index j = 0; j < m; ++j) ds.x(i, j) = value();
    if (has_d)
      for (Index j = 0; j < c; ++j) (*ds.d)(i, j) = value();
    if (has_l)
      for (Index j = 0; j < c; ++j) (*ds.l)(i, j) = value();
  }
  if (next_line()) throw Error(Errc::parse_error, detail::location(line_no, 1) + ": trailing data after " + std::to_string(n) + " rows");
  validate(ds);
  return ds;
}

inline Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  return parse_dataset(in, path.stem().string());
}

inline void write_dataset(std::ostream& os, const Dataset& ds) {
  validate(ds);
  const char* kind = ds.d && ds.l ? "BOTH" : (ds.d ? "LDL" : "LLE");
  os << kind << ' ' << ds.n() << ' ' << ds.m() << ' ' << ds.c() << '\n';
  for (Index i = 0; i < ds.n(); ++i) {
    bool first = true;
    auto put = [&](double v) {
      if (!first) os << ' ';
      os << format_g17(v);
      first = false;
    };
    for (Index j = 0; j < ds.m(); ++j) put(ds.x(i, j));
    if (ds.d)
      for (Index j = 0; j < ds.c(); ++j) put((*ds.d)(i, j));
    if (ds.l)
      for (Index j = 0; j < ds.c(); ++j) put((*ds.l)(i, j));
    os << '\n';
  }
}

/// Writes `ds` to `path`; refuses to replace an existing file unless `force`.
inline void save_dataset(const Dataset& ds, const std::filesystem::path& path, bool force = false) {
  if (!force && std::filesystem::exists(path)) {
    throw Error(Errc::io_error, path.string() + " already exists (use --force to overwrite)");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  write_dataset(out, ds);
  if (!out) throw Error(Errc::io_error, "write failed for " + path.string());
}

/// Rows of whitespace-separated numbers (prediction files).
inline void write_matrix(std::ostream& os, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << format_g17(m(i, j));
    os << '\n';
  }
}

inline Matrix read_matrix(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto tokens = detail::tokenize(line);
    if (tokens.empty()) continue;
    std::vector<double> row;
    for (const auto& [tok, col] : tokens) row.push_back(detail::parse_double(tok, line_no, col));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(Errc::parse_error, detail::location(line_no, 1) + ": row length differs from the first row");
    }
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), Errc::parse_error, "matrix file has no rows");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

inline Dataset subset(const Dataset& ds, const std::vector<Index>& rows) {
  Dataset out;
  out.name = ds.name;
  out.x = ds.x(rows, Eigen::placeholders::all);
  if (ds.d) out.d = Matrix((*ds.d)(rows, Eigen::placeholders::all));
  if (ds.l) out.l = Matrix((*ds.l)(rows, Eigen::placeholders::all));
  return out;
}

/// Logical labels, binarized from distributions when the file has none.
inline Matrix logical_labels(const Dataset& ds) {
  if (ds.l) return *ds.l;
  require(ds.d.has_value(), Errc::invariant_violation, "dataset has no labels");
  return binarize(*ds.d);
}

}  // namespace bdl
