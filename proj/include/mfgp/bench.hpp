#pragma once

// Benchmark orchestration: load or generate data, train each selected
// estimator, score it on the test set and collect a JSON report.

#include "mfgp/config.hpp"
#include "mfgp/metrics.hpp"

#include "json.hpp"

#include <memory>

namespace mfgp {

inline constexpr int kReportVersion = 1;
/// Report keys holding wall-clock measurements.
inline constexpr const char* kTimingKey = "wall_time_s";

struct BenchData {
  MFDataset train;
  DataSet test;
};

BenchData load_bench_data(const BenchConfig& cfg);

std::unique_ptr<MFModel> train_estimator(EstimatorKind kind, const MFDataset& data, const EstimatorOptions& opts);

struct EstimatorOutcome {
  EstimatorKind kind;
  bool ok = false;
  std::string error;
  MetricsReport metrics;
  double wall_time_s = 0.0;
};

struct BenchResult {
  std::vector<EstimatorOutcome> outcomes;
  nlohmann::ordered_json report;
  bool all_failed() const;
};

/// Runs every selected estimator in configured order. A failing estimator is
/// recorded in the report and the run continues.
BenchResult run_benchmark(const BenchConfig& cfg);

/// Serialized report with a trailing newline.
std::string format_report(const nlohmann::ordered_json& report);
/// Copy of `report` with every timing field removed.
nlohmann::ordered_json strip_timing(nlohmann::ordered_json report);

}  // namespace mfgp
