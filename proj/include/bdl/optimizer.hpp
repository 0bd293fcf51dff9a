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

/// \file optimizer.hpp
///
/// Limited-memory BFGS with a strong Wolfe line search (bracketing + zoom with
/// safeguarded cubic interpolation, after Nocedal & Wright, Alg. 3.5/3.6).
///
/// Objectives are passed as a single callable `double fg(const Vector& x,
/// Vector& grad)` returning f(x) and writing the gradient.

#include "bdl/common.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace bdl {

struct LbfgsConfig {
  int memory = 10;
  double c1 = 1e-4;
  double c2 = 0.9;
  double grad_tol = 1e-6;
  int max_iters = 500;
  int max_line_search_evals = 50;
  // Gradient norm the tolerance is relative to; max(1, |grad(x0)|) when unset.
  std::optional<double> grad_reference;
};

inline void validate(const LbfgsConfig& cfg) {
  require(cfg.memory >= 1, Errc::invalid_argument, "LbfgsConfig: memory must be positive");
  require(0.0 < cfg.c1 && cfg.c1 < cfg.c2 && cfg.c2 < 1.0, Errc::invalid_argument,
          "LbfgsConfig: need 0 < c1 < c2 < 1");
  require(cfg.grad_tol > 0.0, Errc::invalid_argument, "LbfgsConfig: grad_tol must be positive");
  require(cfg.max_iters >= 1, Errc::invalid_argument, "LbfgsConfig: max_iters must be positive");
  require(cfg.max_line_search_evals >= 1, Errc::invalid_argument, "LbfgsConfig: max_line_search_evals");
}

enum class LbfgsStatus { converged, max_iterations, line_search_failure };

inline std::string_view status_name(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::converged: return "converged";
    case LbfgsStatus::max_iterations: return "max_iterations";
    case LbfgsStatus::line_search_failure: return "line_search_failure";
  }
  return "unknown";
}

/// One accepted step, with everything needed to re-check the Wolfe conditions.
struct StepRecord {
  double step = 0.0;
  double f_start = 0.0;
  double slope_start = 0.0;  // g(x)^T d
  double f_end = 0.0;
  double slope_end = 0.0;  // g(x + t d)^T d
};

struct LineSearchResult {
  bool ok = false;
  double step = 0.0;
  double f = 0.0;
  Vector x;
  Vector g;
  int evaluations = 0;
};

namespace detail {

// Minimizer of the cubic through (a, fa, da) and (b, fb, db), or NaN.
inline double cubic_minimizer(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  return b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
}

}  // namespace detail

/// Strong Wolfe line search along `dir` from `x`.
///
/// On success the returned step t > 0 satisfies
///   f(x + t d) <= f(x) + c1 t g^T d   and   |g(x + t d)^T d| <= c2 |g^T d|.
/// On failure `ok` is false and the result holds the best sufficient-decrease
/// point seen, if any (step 0 otherwise).
template <class FG>
LineSearchResult wolfe_line_search(FG&& fg, const Vector& x, double f0, const Vector& g0, const Vector& dir,
                                   double initial_step, double c1, double c2, int max_evals) {
  const double slope0 = g0.dot(dir);
  require(slope0 < 0.0, Errc::not_descent_direction, "wolfe_line_search: g^T d = " + format_g17(slope0));

  struct Probe {
    double t, f, slope;
  };
  LineSearchResult best;
  best.x = x;
  best.g = g0;
  best.f = f0;

  LineSearchResult trial;
  trial.x.resize(x.size());
  trial.g.resize(x.size());
  int evals = 0;
  auto evaluate = [&](double t) {
    trial.x = x + t * dir;
    double f = fg(trial.x, trial.g);
    ++evals;
    if (!std::isfinite(f) || !trial.g.allFinite()) f = std::numeric_limits<double>::infinity();
    trial.f = f;
    trial.step = t;
    const Probe p{t, f, std::isfinite(f) ? trial.g.dot(dir) : std::numeric_limits<double>::quiet_NaN()};
    if (std::isfinite(f) && f <= f0 + c1 * t * slope0 && f < best.f) {
      best.f = f;
      best.step = t;
      best.x = trial.x;
      best.g = trial.g;
    }
    return p;
  };
  auto armijo = [&](const Probe& p) { return p.f <= f0 + c1 * p.t * slope0; };
  auto curvature = [&](const Probe& p) { return std::abs(p.slope) <= -c2 * slope0; };
  auto accept = [&]() {
    trial.ok = true;
    trial.evaluations = evals;
    return trial;
  };
  auto fail = [&]() {
    best.ok = false;
    best.evaluations = evals;
    return best;
  };

  auto zoom = [&](Probe lo, Probe hi) -> LineSearchResult {
    while (evals < max_evals) {
      const double left = std::min(lo.t, hi.t);
      const double right = std::max(lo.t, hi.t);
      const double width = right - left;
      if (width <= std::numeric_limits<double>::epsilon() * std::max(1.0, right)) break;
      double t = std::isfinite(hi.f) ? detail::cubic_minimizer(lo.t, lo.f, lo.slope, hi.t, hi.f, hi.slope)
                                     : std::numeric_limits<double>::quiet_NaN();
      if (!std::isfinite(t) || t < left + 0.1 * width || t > right - 0.1 * width) t = 0.5 * (lo.t + hi.t);
      const Probe p = evaluate(t);
      if (!armijo(p) || p.f >= lo.f) {
        hi = p;
      } else {
        if (curvature(p)) return accept();
        if (p.slope * (hi.t - lo.t) >= 0.0) hi = lo;
        lo = p;
      }
    }
    return fail();
  };

  Probe prev{0.0, f0, slope0};
  double t = initial_step;
  for (int i = 0; evals < max_evals; ++i) {
    const Probe p = evaluate(t);
    if (!armijo(p) || (i > 0 && p.f >= prev.f)) return zoom(prev, p);
    if (curvature(p)) return accept();
    if (p.slope >= 0.0) return zoom(p, prev);
    prev = p;
    t *= 2.0;
  }
  return fail();
}

/// Step length satisfying the strong Wolfe conditions, with separate
/// objective and gradient callables.
template <class F, class Grad>
double wolfe_line_search(F&& f, Grad&& grad, const Vector& x, const Vector& dir, double c1 = 1e-4,
                         double c2 = 0.9) {
  auto fg = [&](const Vector& at, Vector& g) {
    g = grad(at);
    return f(at);
  };
  const LineSearchResult r = wolfe_line_search(fg, x, f(x), grad(x), dir, 1.0, c1, c2, 50);
  if (!r.ok) throw Error(Errc::line_search_failure, "no strong Wolfe point within 50 trial steps");
  return r.step;
}

/// Curvature pairs for the two-loop recursion.
class LbfgsHistory {
 public:
  explicit LbfgsHistory(int memory) : memory_(static_cast<std::size_t>(memory)) {}

  /// Stores (s, y) unless s^T y <= 1e-10 |s| |y|. Returns whether it was kept.
  bool push(const Vector& s, const Vector& y) {
    const double sy = s.dot(y);
    if (!(sy > 1e-10 * s.norm() * y.norm())) return false;
    if (pairs_.size() == memory_) pairs_.pop_front();
    pairs_.push_back({s, y, 1.0 / sy});
    return true;
  }

  bool empty() const { return pairs_.empty(); }
  std::size_t size() const { return pairs_.size(); }
  void clear() { pairs_.clear(); }

  /// H * g, with H0 = (s^T y / y^T y) I from the newest pair.
  Vector apply(const Vector& g) const {
    Vector q = g;
    std::vector<double> alpha(pairs_.size());
    for (std::size_t i = pairs_.size(); i-- > 0;) {
      alpha[i] = pairs_[i].rho * pairs_[i].s.dot(q);
      q -= alpha[i] * pairs_[i].y;
    }
    if (!pairs_.empty()) {
      const Pair& last = pairs_.back();
      q *= 1.0 / (last.rho * last.y.squaredNorm());
    }
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      const double beta = pairs_[i].rho * pairs_[i].y.dot(q);
      q += (alpha[i] - beta) * pairs_[i].s;
    }
    return q;
  }

 private:
  struct Pair {
    Vector s, y;
    double rho;
  };
  std::size_t memory_;
  std::deque<Pair> pairs_;
};

struct LbfgsResult {
  Vector x;
  double f = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  LbfgsStatus status = LbfgsStatus::max_iterations;
  std::vector<double> trace;       // f(x0), then f after every accepted step
  std::vector<StepRecord> steps;  // one per accepted step
};

template <class FG>
LbfgsResult lbfgs_minimize(FG&& fg, const Vector& x0, const LbfgsConfig& cfg = {}) {
  validate(cfg);
  require_finite(x0, "lbfgs_minimize x0");

  LbfgsResult out;
  out.x = x0;
  Vector g(x0.size());
  out.f = fg(out.x, g);
  if (!std::isfinite(out.f) || !g.allFinite()) throw Error(Errc::non_finite, "objective is not finite at x0");
  out.trace.push_back(out.f);

  const double threshold = cfg.grad_tol * cfg.grad_reference.value_or(std::max(1.0, g.norm()));
  out.grad_norm = g.norm();
  if (out.grad_norm <= threshold) {
    out.status = LbfgsStatus::converged;
    return out;
  }

  LbfgsHistory history(cfg.memory);
  out.status = LbfgsStatus::max_iterations;
  while (out.iterations < cfg.max_iters) {
    Vector dir = -history.apply(g);
    double initial = 1.0;
    if (history.empty() || !(g.dot(dir) < 0.0)) {
      history.clear();
      dir = -g;
      initial = std::min(1.0, 1.0 / g.norm());
    }
    const double slope = g.dot(dir);
    LineSearchResult ls =
        wolfe_line_search(fg, out.x, out.f, g, dir, initial, cfg.c1, cfg.c2, cfg.max_line_search_evals);
    if (!ls.ok && !history.empty()) {
      // Quasi-Newton direction was useless; retry once along -g.
      history.clear();
      continue;
    }
    if (!ls.ok) {
      if (ls.step > 0.0) {  // keep the best sufficient-decrease point
        out.x = std::move(ls.x);
        out.f = ls.f;
        out.grad_norm = ls.g.norm();
        out.trace.push_back(out.f);
      }
      out.status = LbfgsStatus::line_search_failure;
      break;
    }
    history.push(ls.x - out.x, ls.g - g);
    out.steps.push_back({ls.step, out.f, slope, ls.f, ls.g.dot(dir)});
    out.x = std::move(ls.x);
    g = std::move(ls.g);
    out.f = ls.f;
    out.trace.push_back(out.f);
    ++out.iterations;
    out.grad_norm = g.norm();
    if (out.grad_norm <= threshold) {
      out.status = LbfgsStatus::converged;
      break;
    }
  }
  return out;
}

}  // namespace bdl
