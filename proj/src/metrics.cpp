#include "mfgp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mfgp {
namespace {

void check_lengths(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size())
    throw ConfigurationError(std::string(what) + ": lengths " + std::to_string(a.size()) + " and " +
                             std::to_string(b.size()) + " differ");
  if (a.size() == 0) throw ConfigurationError(std::string(what) + ": empty input");
}

}  // namespace

double rmse(const Vector& pred, const Vector& truth) {
  check_lengths(pred, truth, "rmse");
  return std::sqrt((pred - truth).squaredNorm() / static_cast<double>(pred.size()));
}

double gp_rmse(const Vector& mean, const Vector& variance, const Vector& truth) {
  check_lengths(mean, truth, "gp_rmse");
  check_lengths(variance, truth, "gp_rmse");
  if ((variance.array() < 0.0).any()) throw ConfigurationError("gp_rmse: negative variance");
  return std::sqrt((variance.array() + (mean - truth).array().square()).sum() / static_cast<double>(mean.size()));
}

double r_squared(const Vector& pred, const Vector& truth) {
  check_lengths(pred, truth, "r_squared");
  if (pred.size() < 2) throw DegenerateInputError("r_squared needs at least two points");
  const Eigen::ArrayXd p = pred.array() - pred.mean();
  const Eigen::ArrayXd t = truth.array() - truth.mean();
  const double spp = p.square().sum();
  const double stt = t.square().sum();
  if (!(spp > 0.0) || !(stt > 0.0)) throw DegenerateInputError("r_squared of a constant vector is undefined");
  const double r = (p * t).sum() / std::sqrt(spp * stt);
  return std::clamp(r * r, 0.0, 1.0);
}

double log_ml_ratio(double logml_a, double logml_b) {
  const double diff = logml_a - logml_b;
  if (diff > 700.0) return std::numeric_limits<double>::infinity();
  return std::exp(diff);
}

double ci_coverage(const Vector& mean, const Vector& variance, const Vector& truth, double z) {
  check_lengths(mean, truth, "ci_coverage");
  check_lengths(variance, truth, "ci_coverage");
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < mean.size(); ++i)
    if (std::abs(truth[i] - mean[i]) <= z * std::sqrt(std::max(variance[i], 0.0))) ++hits;
  return static_cast<double>(hits) / static_cast<double>(mean.size());
}

namespace {

std::optional<double> r_squared_or_none(const Vector& pred, const Vector& truth) {
  try {
    return r_squared(pred, truth);
  } catch (const DegenerateInputError&) {
    return std::nullopt;
  }
}

}  // namespace

MetricsReport evaluate_posterior(const Vector& mean, const Vector& variance, const Vector& truth, double log_ml,
                                 double z) {
  MetricsReport m;
  m.rmse = rmse(mean, truth);
  m.gp_rmse = gp_rmse(mean, variance, truth);
  m.r_squared = r_squared_or_none(mean, truth);
  m.log_ml = log_ml;
  m.ci_coverage = ci_coverage(mean, variance, truth, z);
  m.ci_z = z;
  return m;
}

MetricsReport evaluate_point(const Vector& pred, const Vector& truth) {
  MetricsReport m;
  m.rmse = rmse(pred, truth);
  m.r_squared = r_squared_or_none(pred, truth);
  return m;
}

}  // namespace mfgp
