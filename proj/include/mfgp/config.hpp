#pragma once

// Benchmark configuration, read from an INI file with sections
//   [data]               source = analytic | csv, seed, sampling and CSV paths
//   [optimizer]          patience, max_iterations, restarts, learning_rate, restart_spread
//   [estimators.<name>]  one section per selected estimator, in run order
//   [output]             report, model, ci_z
// Unknown sections or keys are rejected.

#include "mfgp/analytic.hpp"
#include "mfgp/estimators.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mfgp {

struct EstimatorEntry {
  EstimatorKind kind;
  EstimatorOptions options;
};

enum class DataSource { Analytic, Csv };

struct BenchConfig {
  DataSource source = DataSource::Analytic;
  std::vector<std::filesystem::path> train_csv;  // level 1 first
  std::filesystem::path test_csv;
  AnalyticOptions analytic;
  std::uint64_t seed = 0;
  OptimizerConfig optimizer;
  /// Empty selects every estimator with default options.
  std::vector<EstimatorEntry> estimators;
  std::filesystem::path report = "report.json";
  std::filesystem::path model;
  double ci_z = 2.0;

  /// Selected estimators with the seed and optimizer settings filled in.
  std::vector<EstimatorEntry> resolved_estimators() const;
  /// Canonical echo of every effective setting.
  nlohmann::ordered_json echo() const;
  void validate() const;
};

/// Relative CSV paths are resolved against `base_dir`.
BenchConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
BenchConfig load_config(const std::filesystem::path& path);

}  // namespace mfgp
