// Command-line front end: bench, train, predict and evaluate.

#include "mfgp/bench.hpp"
#include "mfgp/csv.hpp"
#include "mfgp/gram.hpp"
#include "mfgp/model_io.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace mfgp;

void apply_thread_override() {
  if (const char* env = std::getenv("MFGP_NUM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) set_threads(n);
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

Eigen::Index pick_column(const CsvTable& t, std::initializer_list<const char*> names) {
  for (const char* n : names)
    if (const auto c = t.column(n); c >= 0) return c;
  return static_cast<Eigen::Index>(t.header.size()) - 1;
}

struct BenchArgs {
  std::string config;
  bool analytic = false;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_bench(const BenchArgs& a) {
  BenchConfig cfg = a.config.empty() ? BenchConfig{} : load_config(a.config);
  if (a.analytic) cfg.source = DataSource::Analytic;
  if (a.seed) cfg.seed = *a.seed;
  if (!a.out.empty()) cfg.report = a.out;
  const auto result = run_benchmark(cfg);
  write_text(cfg.report, format_report(result.report));
  for (const auto& o : result.outcomes) {
    if (o.ok)
      std::printf("%-10s rmse=%.6g r2=%.6g log_ml=%.6g\n", to_string(o.kind), o.metrics.rmse, o.metrics.r_squared.value_or(std::nan("")),
                  o.metrics.log_ml.value_or(0.0));
    else
      std::printf("%-10s FAILED: %s\n", to_string(o.kind), o.error.c_str());
  }
  std::printf("report written to %s\n", cfg.report.string().c_str());
  return result.all_failed() ? 1 : 0;
}

int run_train(const std::string& config, std::string out) {
  const BenchConfig cfg = load_config(config);
  if (out.empty()) out = cfg.model.string();
  if (out.empty()) throw ConfigurationError("no model path: pass --out or set [output] model");
  const auto entries = cfg.resolved_estimators();
  const BenchData data = load_bench_data(cfg);
  const auto& entry = entries.front();
  const auto model = train_estimator(entry.kind, data.train, entry.options);
  save_model(*model, out);
  std::printf("trained %s (log_ml=%.17g), model written to %s\n", to_string(entry.kind), model->log_ml(), out.c_str());
  return 0;
}

int run_predict(const std::string& model_path, const std::string& inputs, const std::string& out) {
  const auto model = load_model(model_path);
  const CsvTable table = read_csv_table(inputs);
  Matrix X = table.values;
  if (const auto y = table.column("y"); y >= 0 && y == X.cols() - 1) X.conservativeResize(Eigen::NoChange, X.cols() - 1);
  if (static_cast<std::size_t>(X.cols()) != model->input_dim())
    throw ConfigurationError("width mismatch: model expects " + std::to_string(model->input_dim()) +
                             " input columns, " + inputs + " has " + std::to_string(X.cols()));
  const auto post = model->predict(X);
  Matrix values(X.rows(), 2);
  values << post.mean, post.variance;
  write_csv_table(out, {"mean", "variance"}, values);
  std::printf("%lld predictions written to %s\n", static_cast<long long>(X.rows()), out.c_str());
  return 0;
}

int run_evaluate(const std::string& pred_path, const std::string& truth_path) {
  const CsvTable pred = read_csv_table(pred_path);
  const CsvTable truth = read_csv_table(truth_path);
  const Vector p = pred.values.col(pick_column(pred, {"mean", "y"}));
  const Vector t = truth.values.col(pick_column(truth, {"y", "mean"}));
  std::printf("rmse: %.17g\n", rmse(p, t));
  if (const auto v = pred.column("variance"); v >= 0) std::printf("gp_rmse: %.17g\n", gp_rmse(p, pred.values.col(v), t));
  try {
    std::printf("r_squared: %.17g\n", r_squared(p, t));
  } catch (const DegenerateInputError& e) {
    std::printf("r_squared: undefined (%s)\n", e.what());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multifidelity Gaussian-process surrogates: benchmark, train, predict, evaluate"};
  app.require_subcommand(1);

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Train and score the configured estimators, write a JSON report");
  bench->add_option("--config", bench_args.config, "INI configuration file")->check(CLI::ExistingFile);
  bench->add_flag("--analytic", bench_args.analytic, "Use the built-in analytic problem");
  bench->add_option("--seed", bench_args.seed, "Seed for sampling and optimizer restarts");
  bench->add_option("--out", bench_args.out, "Report path (overrides [output] report)");

  std::string train_config, train_out;
  auto* train = app.add_subcommand("train", "Train the first configured estimator and save the model");
  train->add_option("--config", train_config, "INI configuration file")->required()->check(CLI::ExistingFile);
  train->add_option("--out", train_out, "Model output path (overrides [output] model)");

  std::string model_path, inputs_path, predict_out;
  auto* predict = app.add_subcommand("predict", "Predict mean and variance at the rows of a CSV file");
  predict->add_option("--model", model_path, "Model file written by train")->required()->check(CLI::ExistingFile);
  predict->add_option("--inputs", inputs_path, "CSV with columns x1..xd")->required()->check(CLI::ExistingFile);
  predict->add_option("--out", predict_out, "Output CSV (mean,variance)")->required();

  std::string pred_path, truth_path;
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
  evaluate->add_option("--pred", pred_path, "Predictions CSV (column mean, else y, else last)")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--truth", truth_path, "Truth CSV (column y, else mean, else last)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    std::cerr << (sub ? sub->help() : app.help());
    return 2;
  }

  apply_thread_override();
  try {
    if (*bench) return run_bench(bench_args);
    if (*train) return run_train(train_config, train_out);
    if (*predict) return run_predict(model_path, inputs_path, predict_out);
    if (*evaluate) return run_evaluate(pred_path, truth_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
