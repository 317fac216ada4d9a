#pragma once

#include "mfgp/types.hpp"

#include <cstddef>
#include <span>
#include <string>

namespace mfgp {

enum class MeanKind { Zero, Constant, Linear };

const char* to_string(MeanKind kind);
MeanKind mean_kind_from_string(const std::string& name);

/// Number of trainable coefficients of a mean over features of width `feature_dim`.
std::size_t mean_arity(MeanKind kind, std::size_t feature_dim);

/// Prior mean of a GP.
///
/// Coefficient layout: Constant is [gamma]; Linear is one weight per feature
/// column followed by the intercept gamma. For the augmented features of the
/// multifidelity model this is (alpha_1..alpha_d, beta for each appended
/// low-fidelity column in column order, gamma).
struct MeanFunction {
  MeanKind kind = MeanKind::Zero;
  Vector coefficients;

  static MeanFunction zero() { return {}; }
  static MeanFunction constant(double gamma);
  static MeanFunction linear(Vector coefficients);
  /// All-zero coefficients of the right arity.
  static MeanFunction zeros(MeanKind kind, std::size_t feature_dim);

  std::size_t arity() const { return static_cast<std::size_t>(coefficients.size()); }

  double operator()(std::span<const double> phi) const;
  /// Row-wise evaluation over an N x m feature matrix.
  Vector evaluate(const Matrix& features) const;
  /// d mean / d coefficients, N x arity.
  Matrix jacobian(const Matrix& features) const;

  /// Throws ConfigurationError if the coefficient count does not fit `feature_dim`.
  void check_features(std::size_t feature_dim) const;
};

}  // namespace mfgp
