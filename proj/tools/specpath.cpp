// Command-line front end: fit/predict/eval/explain/importance plus the
// report harnesses (trace-report, benchmark, sweep) that emit figure data
// as CSV/JSON.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "specpath/specpath.hpp"

namespace {

using nlohmann::json;
using namespace specpath;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
  std::string data_path;
  std::string target;
  std::string model_path;
  std::string out_path;
  std::string format = "text";
  std::uint64_t seed = 42;
  int top = 12;
  FitConfig fit;
  bool no_resweep = false;
  std::string baseline;
  std::string mode;
};

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

int max_workers() {
  if (const char* env = std::getenv("SPECPATH_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

struct SplitData {
  Eigen::MatrixXd x_train, x_val, x_test;
  Eigen::VectorXd y_train, y_val, y_test;
};

SplitData make_splits(const Dataset& data, std::uint64_t seed) {
  const SplitIndices idx =
      split_indices(static_cast<std::size_t>(data.n_rows()), seed);
  SplitData s;
  s.x_train = take_rows(data.features, idx.train);
  s.x_val = take_rows(data.features, idx.val);
  s.x_test = take_rows(data.features, idx.test);
  s.y_train = take_rows(data.target, idx.train);
  s.y_val = take_rows(data.target, idx.val);
  s.y_test = take_rows(data.target, idx.test);
  return s;
}

void write_trace_jsonl(const SpectralModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  for (const auto& entry : model.fit_trace) {
    json t;
    t["iteration"] = entry.iteration;
    t["accepted"] = entry.accepted;
    t["k"] = entry.support_size;
    t["block_size"] = entry.block_size;
    t["n_paths"] = entry.n_paths;
    t["train_r2"] = entry.train_r2;
    t["val_r2"] = entry.val_r2;
    t["lambda"] = entry.lambda;
    json added = json::array();
    for (const auto& m : entry.added) added.push_back(path_to_json(m));
    t["added"] = std::move(added);
    out << t.dump() << "\n";
  }
}

struct SplitMetrics {
  double r2 = 0.0;
  double nrmse = 0.0;
};

SplitMetrics score_split(const SpectralModel& model, const Eigen::MatrixXd& x,
                         const Eigen::VectorXd& y) {
  const Eigen::VectorXd yhat = predict_raw(model, x);
  return {r2(y, yhat), nrmse_sigma(y, yhat)};
}

int cmd_fit(const CommonOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const LoadedCsv loaded = load_csv(opt.data_path, opt.target);
  if (loaded.rows_dropped > 0)
    std::cerr << "warning: dropped " << loaded.rows_dropped
              << " rows with missing values\n";
  const SplitData s = make_splits(loaded.dataset, opt.seed);

  if (!opt.baseline.empty() && opt.baseline != "ridge")
    throw ConfigError("unknown baseline '" + opt.baseline + "' (choices: ridge)");
  if (opt.baseline == "ridge") {
    if (!opt.model_path.empty())
      std::cerr << "warning: --model is ignored in baseline mode\n";
    const RidgeBaseline base = fit_ridge_baseline(
        s.x_train, s.y_train, s.x_val, s.y_val, opt.fit.lambda_grid);
    const double train = r2(s.y_train, predict_baseline(base, s.x_train));
    const double val = r2(s.y_val, predict_baseline(base, s.x_val));
    const double test = r2(s.y_test, predict_baseline(base, s.x_test));
    const double nrmse = nrmse_sigma(s.y_test, predict_baseline(base, s.x_test));
    if (opt.format == "json") {
      json out{{"baseline", "ridge"}, {"lambda", base.lambda},
               {"train_r2", train},  {"val_r2", val},
               {"test_r2", test},    {"test_nrmse_sigma", nrmse},
               {"seconds", elapsed_seconds(start)}};
      std::cout << out.dump(2) << "\n";
    } else {
      std::cout << "ridge baseline (lambda " << base.lambda << ")\n"
                << "train R2 " << train << ", val R2 " << val << ", test R2 "
                << test << ", test NRMSE_sigma " << nrmse << "\n"
                << "seconds " << elapsed_seconds(start) << "\n";
    }
    return 0;
  }

  FitConfig config = opt.fit;
  config.seed = opt.seed;
  config.final_resweep = !opt.no_resweep;
  const SpectralModel model = specpath::fit(s.x_train, s.y_train, s.x_val,
                                            s.y_val, config);
  if (model.path_count() == 0)
    std::cerr << "warning: degenerate fit, model is intercept-only\n";
  const double seconds = elapsed_seconds(start);

  if (!opt.model_path.empty()) save_model(model, opt.model_path);
  std::string trace_path = opt.out_path;
  if (trace_path.empty() && !opt.model_path.empty())
    trace_path = opt.model_path + ".trace.jsonl";
  if (!trace_path.empty()) write_trace_jsonl(model, trace_path);

  const SplitMetrics train = score_split(model, s.x_train, s.y_train);
  const SplitMetrics val = score_split(model, s.x_val, s.y_val);
  const SplitMetrics test = score_split(model, s.x_test, s.y_test);
  if (opt.format == "json") {
    json out{{"paths", model.path_count()},
             {"lambda_star", model.lambda_star},
             {"train_r2", train.r2},
             {"val_r2", val.r2},
             {"test_r2", test.r2},
             {"train_nrmse_sigma", train.nrmse},
             {"val_nrmse_sigma", val.nrmse},
             {"test_nrmse_sigma", test.nrmse},
             {"seconds", seconds}};
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "paths " << model.path_count() << ", lambda_star "
              << model.lambda_star << "\n"
              << "train R2 " << train.r2 << " (NRMSE_sigma " << train.nrmse
              << ")\n"
              << "val   R2 " << val.r2 << " (NRMSE_sigma " << val.nrmse << ")\n"
              << "test  R2 " << test.r2 << " (NRMSE_sigma " << test.nrmse
              << ")\n"
              << "seconds " << seconds << "\n";
  }
  return 0;
}

Dataset load_features(const CommonOptions& opt, const SpectralModel& model) {
  Dataset data;
  if (!opt.target.empty()) {
    data = load_csv(opt.data_path, opt.target).dataset;
  } else {
    data = load_csv_features(opt.data_path).dataset;
  }
  if (static_cast<std::size_t>(data.n_features()) != model.dimension())
    throw DataError("data has " + std::to_string(data.n_features()) +
                    " feature columns, model expects " +
                    std::to_string(model.dimension()));
  return data;
}

int cmd_predict(const CommonOptions& opt) {
  const SpectralModel model = load_model(opt.model_path);
  const Dataset data = load_features(opt, model);
  const Eigen::VectorXd yhat = predict_raw(model, data.features);
  if (opt.out_path.empty()) {
    for (Eigen::Index i = 0; i < yhat.size(); ++i)
      std::cout << detail::format_double(yhat[i]) << "\n";
  } else {
    write_column_csv(opt.out_path, "prediction", yhat);
  }
  return 0;
}

int cmd_eval(const CommonOptions& opt) {
  const SpectralModel model = load_model(opt.model_path);
  const LoadedCsv loaded = load_csv(opt.data_path, opt.target);
  if (static_cast<std::size_t>(loaded.dataset.n_features()) != model.dimension())
    throw DataError("data has " + std::to_string(loaded.dataset.n_features()) +
                    " feature columns, model expects " +
                    std::to_string(model.dimension()));
  const Eigen::VectorXd yhat = predict_raw(model, loaded.dataset.features);
  const double score = r2(loaded.dataset.target, yhat);
  const double nrmse = nrmse_sigma(loaded.dataset.target, yhat);
  if (opt.format == "json") {
    json out{{"r2", score}, {"nrmse_sigma", nrmse}};
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "R2 " << score << "\nNRMSE_sigma " << nrmse << "\n";
  }
  return 0;
}

int cmd_explain(const CommonOptions& opt) {
  const SpectralModel model = load_model(opt.model_path);
  std::vector<std::string> names;
  std::optional<Dataset> data;
  if (!opt.data_path.empty()) {
    data = load_features(opt, model);
    names = data->feature_names;
  }
  std::cout << render_expression(model, opt.top, names) << "\n";
  if (data) {
    const ImportanceResult imp = importance(model, data->features);
    if (imp.degenerate)
      std::cerr << "warning: degenerate model, uniform importances\n";
    json obj = json::object();
    for (Eigen::Index j = 0; j < imp.scores.size(); ++j)
      obj[data->feature_names[static_cast<std::size_t>(j)]] = imp.scores[j];
    std::cout << obj.dump(2) << "\n";
  }
  return 0;
}

int cmd_importance(const CommonOptions& opt) {
  const SpectralModel model = load_model(opt.model_path);
  const Dataset data = load_features(opt, model);
  const ImportanceResult imp = importance(model, data.features);
  if (imp.degenerate)
    std::cerr << "warning: degenerate model, uniform importances\n";
  json obj = json::object();
  for (Eigen::Index j = 0; j < imp.scores.size(); ++j)
    obj[data.feature_names[static_cast<std::size_t>(j)]] =
        imp.scores[j] * 100.0;
  std::cout << obj.dump(2) << "\n";
  if (!opt.out_path.empty()) {
    std::ofstream out(opt.out_path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + opt.out_path + "'");
    out << "feature,importance_pct\n";
    for (Eigen::Index j = 0; j < imp.scores.size(); ++j)
      out << data.feature_names[static_cast<std::size_t>(j)] << ","
          << detail::format_double(imp.scores[j] * 100.0) << "\n";
  }
  return 0;
}

int cmd_trace_report(const CommonOptions& opt) {
  const SpectralModel model = load_model(opt.model_path);
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!opt.out_path.empty()) {
    file.open(opt.out_path, std::ios::binary);
    if (!file) throw DataError("cannot open '" + opt.out_path + "'");
    out = &file;
  }
  if (opt.format == "json") {
    json rows = json::array();
    for (const auto& e : model.fit_trace)
      rows.push_back(json{{"iteration", e.iteration},
                          {"accepted", e.accepted},
                          {"n_paths", e.n_paths},
                          {"train_r2", e.train_r2},
                          {"val_r2", e.val_r2},
                          {"lambda", e.lambda}});
    *out << rows.dump(2) << "\n";
  } else {
    *out << "iteration,accepted,n_paths,train_r2,val_r2,lambda\n";
    for (const auto& e : model.fit_trace)
      *out << e.iteration << "," << (e.accepted ? 1 : 0) << "," << e.n_paths
           << "," << detail::format_double(e.train_r2) << ","
           << detail::format_double(e.val_r2) << ","
           << detail::format_double(e.lambda) << "\n";
  }
  return 0;
}

struct BenchmarkRow {
  std::string name;
  std::size_t n = 0;
  Eigen::Index d = 0;
  std::size_t paths = 0;
  double test_r2 = 0.0;
  double seconds = 0.0;
  std::string error;
};

BenchmarkRow run_benchmark_entry(const std::string& path,
                                 const std::string& target,
                                 const CommonOptions& opt) {
  BenchmarkRow row;
  row.name = path;
  try {
    const auto start = std::chrono::steady_clock::now();
    const LoadedCsv loaded = load_csv(path, target);
    row.n = static_cast<std::size_t>(loaded.dataset.n_rows());
    row.d = loaded.dataset.n_features();
    const SplitData s = make_splits(loaded.dataset, opt.seed);
    FitConfig config = opt.fit;
    config.seed = opt.seed;
    config.final_resweep = !opt.no_resweep;
    const SpectralModel model =
        specpath::fit(s.x_train, s.y_train, s.x_val, s.y_val, config);
    row.paths = model.path_count();
    row.test_r2 = r2(s.y_test, predict_raw(model, s.x_test));
    row.seconds = elapsed_seconds(start);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

int cmd_benchmark(const CommonOptions& opt) {
  // Manifest: headered CSV with columns path,target.
  std::ifstream in(opt.data_path, std::ios::binary);
  if (!in) throw DataError("cannot open manifest '" + opt.data_path + "'");
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<std::string> fields;
  bool header = true;
  while (detail::read_csv_record(in, fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (header) {
      if (fields.size() < 2 || fields[0] != "path" || fields[1] != "target")
        throw DataError("manifest must start with header 'path,target'");
      header = false;
      continue;
    }
    if (fields.size() < 2)
      throw DataError("manifest rows need 'path,target' fields");
    entries.emplace_back(fields[0], fields[1]);
  }

  const int workers = max_workers();
  std::vector<BenchmarkRow> rows(entries.size());
  for (std::size_t start = 0; start < entries.size();
       start += static_cast<std::size_t>(workers)) {
    std::vector<std::future<BenchmarkRow>> batch;
    const std::size_t stop =
        std::min(entries.size(), start + static_cast<std::size_t>(workers));
    for (std::size_t i = start; i < stop; ++i)
      batch.push_back(std::async(std::launch::async, run_benchmark_entry,
                                 entries[i].first, entries[i].second, opt));
    for (std::size_t i = start; i < stop; ++i)
      rows[i] = batch[i - start].get();
  }

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!opt.out_path.empty()) {
    file.open(opt.out_path, std::ios::binary);
    if (!file) throw DataError("cannot open '" + opt.out_path + "'");
    out = &file;
  }
  *out << "dataset,n,d,paths,test_r2,seconds,status\n";
  for (const auto& row : rows) {
    if (row.error.empty()) {
      *out << row.name << "," << row.n << "," << row.d << "," << row.paths
           << "," << detail::format_double(row.test_r2) << ","
           << detail::format_double(row.seconds) << ",ok\n";
    } else {
      std::string msg = row.error;
      for (char& c : msg) {
        if (c == ',' || c == '\n') c = ';';
      }
      *out << row.name << ",,,,,," << "error: " << msg << "\n";
    }
  }
  return 0;
}

int cmd_sweep(const CommonOptions& opt) {
  const LoadedCsv loaded = load_csv(opt.data_path, opt.target);
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!opt.out_path.empty()) {
    file.open(opt.out_path, std::ios::binary);
    if (!file) throw DataError("cannot open '" + opt.out_path + "'");
    out = &file;
  }

  if (opt.mode == "lambda") {
    const SplitData s = make_splits(loaded.dataset, opt.seed);
    FitConfig config = opt.fit;
    config.seed = opt.seed;
    config.final_resweep = !opt.no_resweep;
    SpectralModel model =
        specpath::fit(s.x_train, s.y_train, s.x_val, s.y_val, config);
    auto [y_centered, mean] = center_target(s.y_train);
    const Eigen::MatrixXd theta_train =
        transform_to_angles(s.x_train, model.scaling);
    const GramSystem gram = build_gram(theta_train, y_centered, model.paths);
    *out << "lambda,train_r2,val_r2,test_r2\n";
    for (double lambda : config.lambda_grid) {
      const RidgeSolution sol = solve_ridge(gram, lambda);
      SpectralModel variant = model;
      variant.lambda_star = lambda;
      variant.intercept = sol.beta[0];
      variant.amplitudes = sol.beta.tail(sol.beta.size() - 1);
      *out << detail::format_double(lambda) << ","
           << detail::format_double(
                  r2(s.y_train, predict_raw(variant, s.x_train)))
           << ","
           << detail::format_double(r2(s.y_val, predict_raw(variant, s.x_val)))
           << ","
           << detail::format_double(
                  r2(s.y_test, predict_raw(variant, s.x_test)))
           << "\n";
    }
    return 0;
  }

  if (opt.mode == "seed") {
    *out << "seed,paths,train_r2,val_r2,test_r2,seconds\n";
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto start = std::chrono::steady_clock::now();
      const SplitData s = make_splits(loaded.dataset, seed);
      FitConfig config = opt.fit;
      config.seed = seed;
      config.final_resweep = !opt.no_resweep;
      const SpectralModel model =
          specpath::fit(s.x_train, s.y_train, s.x_val, s.y_val, config);
      *out << seed << "," << model.path_count() << ","
           << detail::format_double(r2(s.y_train, predict_raw(model, s.x_train)))
           << ","
           << detail::format_double(r2(s.y_val, predict_raw(model, s.x_val)))
           << ","
           << detail::format_double(r2(s.y_test, predict_raw(model, s.x_test)))
           << "," << detail::format_double(elapsed_seconds(start)) << "\n";
    }
    return 0;
  }

  throw ConfigError("sweep: --mode must be 'lambda' or 'seed'");
}

void add_fit_flags(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--seed", opt.seed, "Split seed");
  cmd->add_option("--max-paths", opt.fit.max_paths, "Path budget");
  cmd->add_option("--k-set", opt.fit.k_set, "Support sizes (comma separated)")
      ->delimiter(',');
  cmd->add_option("--lambda-grid", opt.fit.lambda_grid,
                  "Ridge grid (comma separated, ascending)")
      ->delimiter(',');
  cmd->add_option("--block-size", opt.fit.block_size, "Initial block size");
  cmd->add_option("--patience", opt.fit.patience,
                  "Non-improving iterations before stopping");
  cmd->add_option("--min-improvement", opt.fit.min_improvement,
                  "Validation R2 acceptance tolerance");
  cmd->add_flag("--no-resweep", opt.no_resweep,
                "Skip the final lambda resweep");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse directional-harmonic regression in Chebyshev angular "
               "coordinates"};
  app.require_subcommand(1);
  CommonOptions opt;

  CLI::App* fit = app.add_subcommand("fit", "Fit a model on a CSV dataset");
  fit->add_option("--data", opt.data_path, "Input CSV")->required();
  fit->add_option("--target", opt.target, "Target column name")->required();
  fit->add_option("--model", opt.model_path, "Output model JSON path");
  fit->add_option("--out", opt.out_path, "Output trace JSONL path");
  fit->add_option("--format", opt.format, "Report format: text|json");
  fit->add_option("--baseline", opt.baseline,
                  "Fit a baseline instead (choices: ridge)");
  add_fit_flags(fit, opt);

  CLI::App* predict = app.add_subcommand("predict", "Predict with a model");
  predict->add_option("--data", opt.data_path, "Input CSV")->required();
  predict->add_option("--model", opt.model_path, "Model JSON")->required();
  predict->add_option("--target", opt.target,
                      "Target column to ignore, if present");
  predict->add_option("--out", opt.out_path, "Predictions CSV path");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a model on a CSV");
  eval->add_option("--data", opt.data_path, "Input CSV")->required();
  eval->add_option("--target", opt.target, "Target column name")->required();
  eval->add_option("--model", opt.model_path, "Model JSON")->required();
  eval->add_option("--format", opt.format, "Report format: text|json");

  CLI::App* explain = app.add_subcommand(
      "explain", "Render the fitted model as a harmonic expression");
  explain->add_option("--model", opt.model_path, "Model JSON")->required();
  explain->add_option("--data", opt.data_path,
                      "CSV for feature names and importances");
  explain->add_option("--target", opt.target,
                      "Target column in --data, if present");
  explain->add_option("--top", opt.top, "Terms to display");

  CLI::App* imp = app.add_subcommand("importance",
                                     "Normalized analytic sensitivities");
  imp->add_option("--model", opt.model_path, "Model JSON")->required();
  imp->add_option("--data", opt.data_path, "Samples to average over")
      ->required();
  imp->add_option("--target", opt.target,
                  "Target column in --data, if present");
  imp->add_option("--out", opt.out_path, "CSV output path");

  CLI::App* trace = app.add_subcommand("trace-report",
                                       "Capacity curve from a model's trace");
  trace->add_option("--model", opt.model_path, "Model JSON")->required();
  trace->add_option("--out", opt.out_path, "Output path (default stdout)");
  trace->add_option("--format", opt.format, "Report format: csv|json");

  CLI::App* bench = app.add_subcommand(
      "benchmark", "Fit every dataset in a manifest and report test R2");
  bench->add_option("--data", opt.data_path, "Manifest CSV (path,target)")
      ->required();
  bench->add_option("--out", opt.out_path, "Report CSV path (default stdout)");
  add_fit_flags(bench, opt);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Lambda-stability or seed-variance sweep, long-format CSV");
  sweep->add_option("--mode", opt.mode, "lambda|seed")->required();
  sweep->add_option("--data", opt.data_path, "Input CSV")->required();
  sweep->add_option("--target", opt.target, "Target column name")->required();
  sweep->add_option("--out", opt.out_path, "Output path (default stdout)");
  add_fit_flags(sweep, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (fit->parsed()) return cmd_fit(opt);
    if (predict->parsed()) return cmd_predict(opt);
    if (eval->parsed()) return cmd_eval(opt);
    if (explain->parsed()) return cmd_explain(opt);
    if (imp->parsed()) return cmd_importance(opt);
    if (trace->parsed()) return cmd_trace_report(opt);
    if (bench->parsed()) return cmd_benchmark(opt);
    if (sweep->parsed()) return cmd_sweep(opt);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const StateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
