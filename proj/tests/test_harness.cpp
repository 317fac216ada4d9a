#include "doctest.h"
#include "test_support.hpp"

#include "mfgp/analytic.hpp"
#include "mfgp/bench.hpp"
#include "mfgp/cokriging.hpp"
#include "mfgp/config.hpp"
#include "mfgp/csv.hpp"
#include "mfgp/model_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace mfgp;
using namespace mfgp::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mfgp_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

std::string error_of(const auto& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

OptimizerConfig quick_optimizer() {
  OptimizerConfig cfg;
  cfg.patience = 20;
  cfg.max_iterations = 150;
  cfg.restarts = 1;
  return cfg;
}

MFDataset small_problem() {
  AnalyticOptions opts;
  opts.sizes = {6, 15, 25};
  return gen_analytic(0, opts).train;
}

}  // namespace

TEST_CASE("CSV parsing") {
  const auto t = parse_csv_table("x1,y\n0,1\n1,3\n");
  CHECK(t.values.rows() == 2);
  CHECK(t.values.cols() == 2);
  CHECK(t.column("y") == 1);
  CHECK(t.column("z") == -1);
  CHECK(t.values(1, 1) == 3.0);

  CHECK(parse_csv_table("a,b\r\n1.5e-3, -2\r\n\n").values(0, 0) == 1.5e-3);

  for (const char* bad : {"x1,y\n0,nan\n", "x1,y\n0,NaN\n", "x1,y\ninf,1\n", "x1,y\n-Infinity,1\n"})
    CHECK_THROWS_AS(parse_csv_table(bad), ParseError);

  const std::string msg = error_of([] { parse_csv_table("x1,y\n0,1\n1,abc\n", "data.csv"); });
  CHECK(msg.find("data.csv:3") != std::string::npos);
  CHECK(error_of([] { parse_csv_table("x1,y\n0,1,2\n", "w.csv"); }).find("w.csv:2") != std::string::npos);
  CHECK_THROWS_AS(parse_csv_table(""), ParseError);
}

TEST_CASE("CSV datasets round-trip exactly and enforce their schema") {
  const fs::path dir = scratch_dir("csv");
  std::mt19937_64 rng(1);
  DataSet data{uniform_matrix(rng, 17, 2, -1e3, 1e3), uniform_vector(rng, 17, -1e-7, 1e-7)};
  data.inputs(0, 0) = 0.1;
  data.inputs(1, 1) = std::numbers::pi;
  write_dataset_csv(dir / "a.csv", data);
  const DataSet back = load_dataset_csv(dir / "a.csv");
  CHECK(back.inputs == data.inputs);
  CHECK(back.outputs == data.outputs);

  write_text(dir / "one.csv", "x1,y\n0,1\n1,3\n");
  const DataSet one = load_dataset_csv(dir / "one.csv");
  CHECK(one.size() == 2);
  CHECK(one.input_dim() == 1);

  write_text(dir / "d3.csv", "x1,x2,x3,y\n0,0,0,1\n");
  CHECK_THROWS_AS(load_mf_csv({dir / "a.csv", dir / "d3.csv"}), SchemaError);
  const MFDataset mf = load_mf_csv({dir / "one.csv", dir / "one.csv"});
  CHECK(mf.num_levels() == 2);

  write_text(dir / "hdr.csv", "x,y\n0,1\n");
  CHECK_THROWS_AS(load_dataset_csv(dir / "hdr.csv"), SchemaError);
  CHECK_THROWS(load_dataset_csv(dir / "missing.csv"));
}

TEST_CASE("Analytic problem") {
  CHECK(analytic_level(2, 0.0) == 0.0);
  CHECK(analytic_level(2, 0.25) == 1.0);
  CHECK(analytic_level(2, 0.5) == 0.0);
  CHECK(analytic_level(3, 1.0) == std::exp(-1.0));

  const auto p = gen_analytic(3);
  REQUIRE(p.train.num_levels() == 3);
  CHECK(p.train.levels[0].size() == 10);
  CHECK(p.train.levels[1].size() == 100);
  CHECK(p.train.levels[2].size() == 250);
  CHECK(p.test.size() == 250);
  const auto& l1 = p.train.levels[0];
  CHECK(l1.inputs(0, 0) == 0.0);
  CHECK(l1.inputs(9, 0) == 5.0);
  CHECK(l1.outputs[0] == 0.0);
  CHECK(l1.outputs[9] == 0.0);
  for (std::size_t l = 0; l < 3; ++l)
    for (Eigen::Index i = 0; i < p.train.levels[l].inputs.rows(); ++i)
      CHECK(p.train.levels[l].outputs[i] == analytic_level(l + 1, p.train.levels[l].inputs(i, 0)));

  // Pearson correlation between levels 1 and 2 on the test grid.
  const Vector& x = p.test.inputs.col(0);
  Vector y2(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) y2[i] = analytic_level(2, x[i]);
  const Vector a = p.test.outputs.array() - p.test.outputs.mean();
  const Vector b = y2.array() - y2.mean();
  const double r = a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
  CHECK(std::abs(r - 0.638) <= 0.05);

  AnalyticOptions uni;
  uni.high = Sampling::Uniform;
  const auto u1 = gen_analytic(5, uni), u2 = gen_analytic(5, uni), u3 = gen_analytic(6, uni);
  CHECK(u1.train.levels[0].inputs == u2.train.levels[0].inputs);
  CHECK(u1.train.levels[0].inputs != u3.train.levels[0].inputs);
  CHECK(u1.train.levels[0].inputs.minCoeff() >= 0.0);
  CHECK(u1.train.levels[0].inputs.maxCoeff() < 5.0);
  CHECK(u1.train.levels[1].inputs == p.train.levels[1].inputs);
}

TEST_CASE("Config parsing") {
  const auto cfg = parse_config(R"(
[data]
source = analytic
seed = 11
high_sampling = uniform
sizes = 5, 20, 30

[optimizer]
patience = 7
restarts = 2

[estimators.kriging]

[estimators.proposed]
surrogates = knn, linear
knn_k = 3

[estimators.cokriging]
rank = 1

[output]
report = out/r.json
ci_z = 1.5
)",
                                "/base");
  CHECK(cfg.seed == 11);
  CHECK(cfg.analytic.high == Sampling::Uniform);
  CHECK(cfg.analytic.sizes[1] == 20);
  CHECK(cfg.optimizer.patience == 7);
  CHECK(cfg.report == fs::path("/base/out/r.json"));
  CHECK(cfg.ci_z == 1.5);
  REQUIRE(cfg.estimators.size() == 3);
  CHECK(cfg.estimators[0].kind == EstimatorKind::Kriging);
  CHECK(cfg.estimators[1].kind == EstimatorKind::Proposed);
  REQUIRE(cfg.estimators[1].options.surrogates.size() == 2);
  CHECK(cfg.estimators[1].options.surrogates[0].kind == SurrogateKind::Knn);
  CHECK(cfg.estimators[1].options.surrogates[0].knn_k == 3);
  CHECK(cfg.estimators[2].options.cokriging_rank == 1);
  const auto resolved = cfg.resolved_estimators();
  CHECK(resolved[1].options.optimizer.patience == 7);
  CHECK(resolved[1].options.optimizer.seed == 11);

  CHECK(parse_config("").estimators.empty());
  CHECK(parse_config("").resolved_estimators().size() == 5);

  CHECK_THROWS_AS(parse_config("[data]\nbogus = 1\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("[nope]\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("[estimators.magic]\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("[optimizer]\npatience = -3\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("[data]\nsource = csv\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("[estimators.koh]\nrank = 2\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("[output]\nci_z = 0\n"), ConfigurationError);
  CHECK_THROWS_AS(load_config("/nonexistent/mfgp.ini"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("seed = 1\n[data]\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("[data]\nseed = 1\nseed = 2\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_config("[estimators.nargp]\n[estimators.nargp]\n"), ConfigurationError);
  CHECK(parse_config("; comment\n[estimators.nargp]\nsurrogate = \"knn\"\n").estimators[0].options.surrogates[0].kind ==
        SurrogateKind::Knn);
}

TEST_CASE("Saved models reproduce their predictions exactly") {
  const MFDataset data = small_problem();
  const Matrix q = linspace(-0.3, 5.3, 37);
  const fs::path dir = scratch_dir("models");
  for (auto kind : {EstimatorKind::Proposed, EstimatorKind::Koh, EstimatorKind::Nargp, EstimatorKind::Cokriging,
                    EstimatorKind::Kriging}) {
    CAPTURE(to_string(kind));
    EstimatorOptions opts;
    opts.optimizer = quick_optimizer();
    if (kind == EstimatorKind::Proposed) opts.surrogates = {SurrogateSpec{SurrogateKind::Knn, 2}, SurrogateSpec{SurrogateKind::Linear}};
    const auto model = train_estimator(kind, data, opts);
    const fs::path path = dir / (std::string(to_string(kind)) + ".json");
    save_model(*model, path);
    const auto loaded = load_model(path);
    CHECK(loaded->kind() == kind);
    CHECK(loaded->input_dim() == 1);
    const auto a = model->predict(q), b = loaded->predict(q);
    CHECK(a.mean == b.mean);
    CHECK(a.variance == b.variance);
    CHECK(loaded->log_ml() == model->log_ml());
  }
  auto j = nlohmann::json::parse(std::ifstream(dir / "kriging.json"));
  j["version"] = 99;
  CHECK_THROWS_AS(model_from_json(j), SchemaError);
  j["version"] = 1;
  j["estimator"] = "oracle";
  CHECK_THROWS_AS(model_from_json(j), SchemaError);
}

TEST_CASE("Benchmark reports are deterministic and record failures") {
  auto cfg = parse_config(R"(
[data]
seed = 4
sizes = 7, 15, 25
test_points = 40
[optimizer]
patience = 20
max_iterations = 120
[estimators.proposed]
[estimators.kriging]
[estimators.cokriging]
max_points = 10
)");
  const auto r1 = run_benchmark(cfg);
  const auto r2 = run_benchmark(cfg);
  CHECK(format_report(strip_timing(r1.report)) == format_report(strip_timing(r2.report)));
  CHECK(format_report(strip_timing(r1.report)).find(kTimingKey) == std::string::npos);
  CHECK(format_report(r1.report).find(kTimingKey) != std::string::npos);

  const auto& rep = r1.report;
  CHECK(rep["report_version"] == kReportVersion);
  CHECK(rep["seed"] == 4);
  REQUIRE(rep["estimators"].size() == 3);
  CHECK(rep["estimators"][0]["name"] == "proposed");
  CHECK(rep["estimators"][0]["status"] == "ok");
  CHECK(rep["estimators"][0]["metrics"].contains("rmse"));
  CHECK(rep["estimators"][2]["status"] == "failed");
  CHECK(rep["estimators"][2]["error"].get<std::string>().find("10") != std::string::npos);
  CHECK_FALSE(r1.all_failed());
  CHECK(r1.outcomes[1].ok);
  CHECK(r1.outcomes[1].metrics.log_ml.has_value());
}
