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

// bdl: command-line front end for bidirectional label distribution learning
// and label enhancement.
//
// Exit codes: 0 success, 2 parse/validation error, 3 numerical failure.

#include "bdl/harness/dataset.hpp"
#include "bdl/harness/experiments.hpp"
#include "bdl/harness/report.hpp"
#include "bdl/harness/synthetic.hpp"
#include "bdl/ldl.hpp"
#include "bdl/le.hpp"
#include "bdl/metrics.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
  std::string data;
  std::string output;
  std::string format = "json";
  std::uint64_t seed = 1;
  int folds = 10;
  bool force = false;
};

struct MethodFlags {
  std::string method;
  double lambda1 = 1e-3;
  double lambda2 = 1e-2;
  double alpha = 1e-3;
  double lambda = 1e-3;
  int knn = 0;  // 0: c + 1
  std::string map = "egk";
  bool bias = false;
  bool standardize = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_folds, bool with_format) {
  cmd->add_option("--data", f.data, "Dataset file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  if (with_folds) cmd->add_option("--folds", f.folds, "Cross-validation folds")->capture_default_str()->check(CLI::Range(2, 1000000));
  cmd->add_option("--output", f.output, "Output path (stdout when omitted)");
  if (with_format) cmd->add_option("--format", f.format, "Report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
}

void add_ldl_flags(CLI::App* cmd, MethodFlags& f) {
  cmd->add_option("--lambda1", f.lambda1, "Reconstruction weight (bd-ldl)")->capture_default_str()->check(CLI::NonNegativeNumber);
  cmd->add_option("--lambda2", f.lambda2, "Parameter norm weight (bd-ldl, ud-ldl)")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_flag("--bias", f.bias, "Append a constant feature");
  cmd->add_flag("--standardize", f.standardize, "Z-score features");
}

void add_le_flags(CLI::App* cmd, MethodFlags& f) {
  cmd->add_option("--alpha", f.alpha, "Reconstruction weight (bd-le)")->capture_default_str()->check(CLI::NonNegativeNumber);
  cmd->add_option("--lambda", f.lambda, "Manifold weight (bd-le, ud-le)")->capture_default_str()->check(CLI::NonNegativeNumber);
  cmd->add_option("--knn", f.knn, "Neighbours in the similarity graph (default c+1)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--map", f.map, "Feature map")->check(CLI::IsMember({"linear", "egk"}))->capture_default_str();
}

bdl::MethodHyper to_hyper(const MethodFlags& f) {
  bdl::MethodHyper h;
  h.ldl.lambda1 = f.lambda1;
  h.ldl.lambda2 = f.lambda2;
  h.options.bias = f.bias;
  h.options.standardize = f.standardize;
  h.le.alpha = f.alpha;
  h.le.lambda = f.lambda;
  h.le.k = f.knn;
  h.le.map = *bdl::parse_map_kind(f.map);
  return h;
}

bdl::Method require_method(const std::string& name) {
  const auto m = bdl::parse_method(name);
  if (!m) throw bdl::Error(bdl::Errc::invalid_argument, "unknown method '" + name + "'");
  return *m;
}

bdl::Metric require_metric(const std::string& name) {
  const auto m = bdl::parse_metric(name);
  if (!m) throw bdl::Error(bdl::Errc::invalid_argument, "unknown metric '" + name + "'");
  return *m;
}

std::vector<double> parse_list(const std::string& text) {
  if (text.empty()) return bdl::default_grid();
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0') throw bdl::Error(bdl::Errc::invalid_argument, "bad grid value '" + item + "'");
    out.push_back(v);
  }
  return out;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
  } else {
    bdl::write_text_file(path, text);
  }
}

template <class WriteFn>
void emit_stream(const std::string& path, WriteFn&& write) {
  std::ostringstream os;
  write(os);
  emit(os.str(), path);
}

bdl::ReportFormat format_of(const CommonFlags& f) { return *bdl::parse_report_format(f.format); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bidirectional label distribution learning and label enhancement"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "bdl 0.1.0");

  // gen
  bdl::SyntheticSpec synth;
  std::string gen_output;
  bool gen_force = false;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  gen->add_option("--n", synth.n, "Instances")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--m", synth.m, "Features")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--c", synth.c, "Labels")->capture_default_str()->check(CLI::Range(2, 1000000));
  gen->add_option("--noise", synth.noise, "Logit noise scale")->capture_default_str()->check(CLI::NonNegativeNumber);
  gen->add_option("--clusters", synth.manifold_clusters, "Feature clusters")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  gen->add_option("--output", gen_output, "Dataset path")->required();
  gen->add_flag("--force", gen_force, "Overwrite an existing file");

  // train-ldl
  CommonFlags train_common;
  MethodFlags train_method;
  train_method.method = "bd-ldl";
  auto* train = app.add_subcommand("train-ldl", "Train a distribution learner and write the model");
  add_common(train, train_common, false, false);
  train->add_option("--method", train_method.method, "bd-ldl or ud-ldl")->check(CLI::IsMember({"bd-ldl", "ud-ldl"}))->capture_default_str();
  add_ldl_flags(train, train_method);

  // predict-ldl
  CommonFlags predict_common;
  std::string model_path;
  auto* predict = app.add_subcommand("predict-ldl", "Predict distributions with a saved model");
  add_common(predict, predict_common, false, false);
  predict->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);

  // enhance
  CommonFlags enhance_common;
  MethodFlags enhance_method;
  enhance_method.method = "bd-le";
  std::string enhance_model, enhance_report;
  auto* enhance = app.add_subcommand("enhance", "Recover label distributions from logical labels");
  add_common(enhance, enhance_common, false, true);
  enhance->add_option("--method", enhance_method.method, "bd-le or ud-le")->check(CLI::IsMember({"bd-le", "ud-le"}))->capture_default_str();
  enhance->add_option("--model-out", enhance_model, "Also write the trained model");
  enhance->add_option("--report", enhance_report, "Score against the dataset's distributions and write a report");
  enhance->add_flag("--force", enhance_common.force, "Overwrite an existing output file");
  add_le_flags(enhance, enhance_method);

  // eval
  CommonFlags eval_common;
  std::string eval_pred;
  auto* eval = app.add_subcommand("eval", "Score predicted distributions against a dataset");
  add_common(eval, eval_common, false, true);
  eval->add_option("--pred", eval_pred, "Predictions (rows of c values)")->required()->check(CLI::ExistingFile);

  // cv
  CommonFlags cv_common;
  MethodFlags cv_method;
  cv_method.method = "bd-ldl";
  auto* cv = app.add_subcommand("cv", "Cross-validate a distribution learner");
  add_common(cv, cv_common, true, true);
  cv->add_option("--method", cv_method.method, "bd-ldl or ud-ldl")->check(CLI::IsMember({"bd-ldl", "ud-ldl"}))->capture_default_str();
  add_ldl_flags(cv, cv_method);

  // grid
  CommonFlags grid_common;
  MethodFlags grid_method;
  grid_method.method = "bd-ldl";
  std::string grid_metric = "chebyshev", grid1, grid2;
  auto* grid = app.add_subcommand("grid", "Grid search over method parameters");
  add_common(grid, grid_common, true, true);
  grid->add_option("--method", grid_method.method, "bd-ldl, ud-ldl, bd-le or ud-le")->capture_default_str();
  grid->add_option("--metric", grid_metric, "Selection metric")->capture_default_str();
  grid->add_option("--grid1", grid1, "Comma-separated values of the first parameter (default 1e-4..1e3)");
  grid->add_option("--grid2", grid2, "Comma-separated values of the second parameter (default 1e-4..1e3)");
  add_ldl_flags(grid, grid_method);
  add_le_flags(grid, grid_method);

  // sweep
  CommonFlags sweep_common;
  MethodFlags sweep_method;
  sweep_method.method = "bd-ldl";
  std::string sweep_metric = "chebyshev", range1, range2;
  auto* sweep = app.add_subcommand("sweep", "Score the full grid of two parameters as a CSV matrix");
  add_common(sweep, sweep_common, true, false);
  sweep->add_option("--method", sweep_method.method, "bd-ldl or bd-le")->check(CLI::IsMember({"bd-ldl", "bd-le"}))->capture_default_str();
  sweep->add_option("--metric", sweep_metric, "Reported metric")->capture_default_str();
  sweep->add_option("--range1", range1, "Comma-separated values of the first parameter (default 1e-4..1e3)");
  sweep->add_option("--range2", range2, "Comma-separated values of the second parameter (default 1e-4..1e3)");
  add_ldl_flags(sweep, sweep_method);
  add_le_flags(sweep, sweep_method);

  // pipeline
  CommonFlags pipe_common;
  MethodFlags pipe_method;
  auto* pipeline = app.add_subcommand("pipeline", "Compare learning from true and from recovered distributions");
  add_common(pipeline, pipe_common, true, true);
  add_ldl_flags(pipeline, pipe_method);
  add_le_flags(pipeline, pipe_method);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*gen) {
      bdl::save_dataset(bdl::gen_synthetic(synth), gen_output, gen_force);
    } else if (*train) {
      const bdl::Dataset ds = bdl::load_dataset(train_common.data);
      if (!ds.d) throw bdl::Error(bdl::Errc::invariant_violation, "training needs label distributions");
      const auto model = bdl::train_ldl_method(require_method(train_method.method), ds.x, *ds.d, to_hyper(train_method));
      emit_stream(train_common.output, [&](std::ostream& os) { bdl::write_ldl_model(os, model); });
    } else if (*predict) {
      std::ifstream in(model_path);
      const bdl::LdlModel model = bdl::read_ldl_model(in);
      const bdl::Dataset ds = bdl::load_dataset(predict_common.data);
      const bdl::Matrix pred = bdl::predict_ldl(model, ds.x);
      emit_stream(predict_common.output, [&](std::ostream& os) { bdl::write_matrix(os, pred); });
    } else if (*enhance) {
      const bdl::Dataset ds = bdl::load_dataset(enhance_common.data);
      const bdl::Method method = require_method(enhance_method.method);
      const bdl::MethodHyper hyper = to_hyper(enhance_method);
      const bdl::LeModel model = bdl::train_le_method(method, ds.x, bdl::logical_labels(ds), hyper);
      if (model.info.status == bdl::LbfgsStatus::line_search_failure) {
        std::cerr << "warning: line search stopped early after " << model.info.iterations
                  << " iterations (gradient norm " << model.info.grad_norm << ")\n";
      }
      bdl::Dataset out;
      out.name = ds.name;
      out.x = ds.x;
      out.d = bdl::recover(model, ds.x);
      out.l = bdl::logical_labels(ds);
      if (enhance_common.output.empty()) {
        bdl::write_dataset(std::cout, out);
      } else {
        bdl::save_dataset(out, enhance_common.output, enhance_common.force);
      }
      if (!enhance_model.empty()) {
        emit_stream(enhance_model, [&](std::ostream& os) { bdl::write_le_model(os, model); });
      }
      if (!enhance_report.empty()) {
        const auto report = bdl::run_le(ds, method, hyper);
        bdl::emit_report(report, format_of(enhance_common), enhance_report);
      }
    } else if (*eval) {
      const bdl::Dataset ds = bdl::load_dataset(eval_common.data);
      if (!ds.d) throw bdl::Error(bdl::Errc::invariant_violation, "evaluation needs label distributions");
      std::ifstream in(eval_pred);
      const bdl::Matrix pred = bdl::read_matrix(in);
      bdl::EvalReport report;
      report.command = "eval";
      bdl::ReportRow row;
      row.method = std::filesystem::path(eval_pred).stem().string();
      row.dataset = ds.name;
      row.metrics = bdl::summarize({bdl::evaluate_all(*ds.d, pred)});
      report.rows.push_back(row);
      emit(bdl::render(report, format_of(eval_common)), eval_common.output);
    } else if (*cv) {
      const bdl::Dataset ds = bdl::load_dataset(cv_common.data);
      const auto report =
          bdl::run_cv(ds, require_method(cv_method.method), to_hyper(cv_method), cv_common.folds, cv_common.seed);
      emit(bdl::render(report, format_of(cv_common)), cv_common.output);
    } else if (*grid) {
      const bdl::Dataset ds = bdl::load_dataset(grid_common.data);
      const bdl::Method method = require_method(grid_method.method);
      std::vector<std::vector<double>> grids{parse_list(grid1)};
      if (bdl::param_names(method).size() == 2) grids.push_back(parse_list(grid2));
      const auto result = bdl::grid_search(ds, method, grids, grid_common.folds, grid_common.seed,
                                           require_metric(grid_metric), to_hyper(grid_method));
      emit(grid_common.format == "json" ? bdl::to_json(result) : bdl::to_csv(result), grid_common.output);
    } else if (*sweep) {
      const bdl::Dataset ds = bdl::load_dataset(sweep_common.data);
      const auto result = bdl::param_sweep(ds, require_method(sweep_method.method), parse_list(range1),
                                           parse_list(range2), require_metric(sweep_metric), sweep_common.folds,
                                           sweep_common.seed, to_hyper(sweep_method));
      emit(bdl::to_csv(result), sweep_common.output);
    } else if (*pipeline) {
      const bdl::Dataset ds = bdl::load_dataset(pipe_common.data);
      const bdl::MethodHyper hyper = to_hyper(pipe_method);
      const auto report =
          bdl::pipeline_le_ldl(ds, hyper.le, hyper.ldl, pipe_common.folds, pipe_common.seed, hyper.options);
      emit(bdl::render(report, format_of(pipe_common)), pipe_common.output);
    }
  } catch (const bdl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return bdl::is_numerical(e.code()) ? kExitNumerical : kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}
