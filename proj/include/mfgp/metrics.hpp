#pragma once

// Evaluation metrics for point and GP predictions. All functions are pure.

#include "mfgp/types.hpp"

#include <optional>

namespace mfgp {

/// Root mean squared error. Throws ConfigurationError on a length mismatch or
/// empty input.
double rmse(const Vector& pred, const Vector& truth);

/// sqrt(mean(variance + (mean - truth)^2)). Throws ConfigurationError on a
/// length mismatch or a negative variance.
double gp_rmse(const Vector& mean, const Vector& variance, const Vector& truth);

/// Squared sample Pearson correlation. Needs at least two points; throws
/// DegenerateInputError when either vector is constant.
double r_squared(const Vector& pred, const Vector& truth);

/// exp(logml_a - logml_b); returns +infinity once the exponent passes 700.
double log_ml_ratio(double logml_a, double logml_b);

/// Fraction of points with |truth - mean| <= z * sqrt(variance).
double ci_coverage(const Vector& mean, const Vector& variance, const Vector& truth, double z);

struct MetricsReport {
  double rmse = 0.0;
  std::optional<double> gp_rmse;
  /// Absent when either vector is constant.
  std::optional<double> r_squared;
  std::optional<double> log_ml;
  std::optional<double> ci_coverage;
  double ci_z = 2.0;
};

/// Metrics for a GP-style prediction (mean, variance, log-ML all present).
MetricsReport evaluate_posterior(const Vector& mean, const Vector& variance, const Vector& truth, double log_ml,
                                 double z = 2.0);
/// Metrics for a point prediction.
MetricsReport evaluate_point(const Vector& pred, const Vector& truth);

}  // namespace mfgp
