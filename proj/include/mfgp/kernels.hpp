#pragma once

#include "mfgp/types.hpp"

#include <cstddef>
#include <span>
#include <variant>

namespace mfgp {

/// Anisotropic squared-exponential kernel
///   k(x, x') = b^2 exp(-1/2 sum_i (x_i - x'_i)^2 / lambda_i^2).
///
/// Trainable parameters are (log b, log lambda_1, ..., log lambda_m), in that
/// order.
struct ArdKernel {
  double amplitude = 1.0;
  Vector lengthscales;

  ArdKernel() = default;
  ArdKernel(double amplitude, Vector lengthscales);
  /// Unit amplitude and unit lengthscales over `dim` inputs.
  static ArdKernel unit(std::size_t dim);

  std::size_t input_dim() const { return static_cast<std::size_t>(lengthscales.size()); }
  std::size_t param_count() const { return 1 + input_dim(); }
  double prior_variance() const { return amplitude * amplitude; }

  double operator()(std::span<const double> x, std::span<const double> x2) const;
  /// Writes dk/d(log theta) into `grad` (length param_count()) and returns k.
  double eval_with_gradient(std::span<const double> x, std::span<const double> x2,
                            std::span<double> grad) const;

  Vector log_params() const;
  static ArdKernel from_log_params(std::span<const double> values);

  /// Throws ConfigurationError unless b > 0 and every lambda_i > 0.
  void validate() const;
};

/// Composite kernel of nonlinear autoregressive GPs over z = [x; h]:
///   k(z, z') = k_p(x, x') k_h(h, h') + k_delta(x, x').
///
/// Parameters are stored as three ARD blocks in the order (p, h, delta).
struct NargpKernel {
  ArdKernel input_scale;   // k_p over the d inputs
  ArdKernel lowfi;         // k_h over the single low-fidelity coordinate
  ArdKernel discrepancy;   // k_delta over the d inputs

  NargpKernel() = default;
  NargpKernel(ArdKernel input_scale, ArdKernel lowfi, ArdKernel discrepancy);
  static NargpKernel unit(std::size_t input_dim);

  std::size_t input_dim() const { return input_scale.input_dim() + 1; }
  std::size_t param_count() const {
    return input_scale.param_count() + lowfi.param_count() + discrepancy.param_count();
  }
  double prior_variance() const {
    return input_scale.prior_variance() * lowfi.prior_variance() + discrepancy.prior_variance();
  }

  double operator()(std::span<const double> z, std::span<const double> z2) const;
  double eval_with_gradient(std::span<const double> z, std::span<const double> z2,
                            std::span<double> grad) const;

  Vector log_params() const;
  /// `shape` supplies the block dimensions.
  static NargpKernel from_log_params(const NargpKernel& shape, std::span<const double> values);

  void validate() const;
};

using Kernel = std::variant<ArdKernel, NargpKernel>;

std::size_t kernel_input_dim(const Kernel& kernel);
std::size_t kernel_param_count(const Kernel& kernel);
/// k(x, x) for the stationary kernels implemented here.
double kernel_prior_variance(const Kernel& kernel);
double kernel_eval(const Kernel& kernel, std::span<const double> x, std::span<const double> x2);
double kernel_eval_with_gradient(const Kernel& kernel, std::span<const double> x,
                                 std::span<const double> x2, std::span<double> grad);
Vector kernel_log_params(const Kernel& kernel);
Kernel kernel_with_log_params(const Kernel& shape, std::span<const double> values);
void kernel_validate(const Kernel& kernel);

}  // namespace mfgp
