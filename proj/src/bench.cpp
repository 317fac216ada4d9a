#include "mfgp/bench.hpp"

#include "mfgp/cokriging.hpp"
#include "mfgp/csv.hpp"

#include <chrono>
#include <algorithm>

namespace mfgp {

BenchData load_bench_data(const BenchConfig& cfg) {
  if (cfg.source == DataSource::Analytic) {
    auto p = gen_analytic(cfg.seed, cfg.analytic);
    return {std::move(p.train), std::move(p.test)};
  }
  BenchData data{load_mf_csv(cfg.train_csv), load_dataset_csv(cfg.test_csv)};
  if (data.test.input_dim() != data.train.input_dim())
    throw SchemaError(cfg.test_csv.string() + ": input dimension " + std::to_string(data.test.input_dim()) +
                      " differs from the training data's " + std::to_string(data.train.input_dim()));
  return data;
}

std::unique_ptr<MFModel> train_estimator(EstimatorKind kind, const MFDataset& data, const EstimatorOptions& opts) {
  switch (kind) {
    case EstimatorKind::Proposed: return std::make_unique<ProposedModel>(train_proposed(data, opts));
    case EstimatorKind::Koh: return std::make_unique<KohModel>(train_koh(data, opts));
    case EstimatorKind::Nargp: return std::make_unique<NargpModel>(train_nargp(data, opts));
    case EstimatorKind::Cokriging: return std::make_unique<CokrigingModel>(train_cokriging(data, opts));
    case EstimatorKind::Kriging:
      data.validate();
      return std::make_unique<KrigingModel>(train_kriging(data.level(1), opts.optimizer));
  }
  throw ConfigurationError("unknown estimator");
}

bool BenchResult::all_failed() const {
  return std::none_of(outcomes.begin(), outcomes.end(), [](const EstimatorOutcome& o) { return o.ok; });
}

BenchResult run_benchmark(const BenchConfig& cfg) {
  cfg.validate();
  const BenchData data = load_bench_data(cfg);
  BenchResult result;
  const auto cache = std::make_shared<SurrogateCache>();
  for (const auto& entry : cfg.resolved_estimators()) {
    EstimatorOutcome out{entry.kind, false, {}, {}, 0.0};
    const auto start = std::chrono::steady_clock::now();
    try {
      EstimatorOptions options = entry.options;
      options.surrogate_cache = cache;
      const auto model = train_estimator(entry.kind, data.train, options);
      const auto post = model->predict(data.test.inputs);
      out.metrics = evaluate_posterior(post.mean, post.variance, data.test.outputs, model->log_ml(), cfg.ci_z);
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.outcomes.push_back(std::move(out));
  }

  nlohmann::ordered_json& r = result.report;
  r["report_version"] = kReportVersion;
  r["seed"] = cfg.seed;
  r["config"] = cfg.echo();
  r["training_sizes"] = nlohmann::ordered_json::array();
  for (const auto& level : data.train.levels) r["training_sizes"].push_back(level.size());
  r["test_points"] = data.test.size();
  r["log_ml_space"] = "standardized inputs, mean-centered targets";
  auto& blocks = r["estimators"] = nlohmann::ordered_json::array();
  for (const auto& o : result.outcomes) {
    nlohmann::ordered_json b;
    b["name"] = to_string(o.kind);
    b["status"] = o.ok ? "ok" : "failed";
    if (o.ok) {
      const auto& m = o.metrics;
      const auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
      };
      b["metrics"] = {{"rmse", m.rmse},
                      {"gp_rmse", opt(m.gp_rmse)},
                      {"r_squared", opt(m.r_squared)},
                      {"log_ml", opt(m.log_ml)},
                      {"ci_coverage", opt(m.ci_coverage)},
                      {"ci_z", m.ci_z}};
    } else {
      b["error"] = o.error;
    }
    b[kTimingKey] = o.wall_time_s;
    blocks.push_back(std::move(b));
  }
  return result;
}

std::string format_report(const nlohmann::ordered_json& report) { return report.dump(2) + "\n"; }

nlohmann::ordered_json strip_timing(nlohmann::ordered_json report) {
  if (report.is_object()) {
    report.erase(kTimingKey);
    for (auto& [key, value] : report.items()) value = strip_timing(value);
  } else if (report.is_array()) {
    for (auto& value : report) value = strip_timing(value);
  }
  return report;
}

}  // namespace mfgp
