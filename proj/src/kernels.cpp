#include "mfgp/kernels.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace mfgp {

ArdKernel::ArdKernel(double amplitude, Vector lengthscales)
    : amplitude(amplitude), lengthscales(std::move(lengthscales)) {}

ArdKernel ArdKernel::unit(std::size_t dim) {
  return ArdKernel(1.0, Vector::Ones(static_cast<Eigen::Index>(dim)));
}

double ArdKernel::operator()(std::span<const double> x, std::span<const double> x2) const {
  double r2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = (x[i] - x2[i]) / lengthscales[static_cast<Eigen::Index>(i)];
    r2 += r * r;
  }
  return amplitude * amplitude * std::exp(-0.5 * r2);
}

double ArdKernel::eval_with_gradient(std::span<const double> x, std::span<const double> x2,
                                     std::span<double> grad) const {
  double r2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = (x[i] - x2[i]) / lengthscales[static_cast<Eigen::Index>(i)];
    grad[i + 1] = r * r;
    r2 += r * r;
  }
  const double k = amplitude * amplitude * std::exp(-0.5 * r2);
  grad[0] = 2.0 * k;
  for (std::size_t i = 0; i < x.size(); ++i) grad[i + 1] *= k;
  return k;
}

Vector ArdKernel::log_params() const {
  Vector out(static_cast<Eigen::Index>(param_count()));
  out[0] = std::log(amplitude);
  out.tail(lengthscales.size()) = lengthscales.array().log().matrix();
  return out;
}

ArdKernel ArdKernel::from_log_params(std::span<const double> values) {
  if (values.empty()) throw ConfigurationError("ARD kernel needs at least an amplitude parameter");
  Vector ls(static_cast<Eigen::Index>(values.size() - 1));
  for (std::size_t i = 1; i < values.size(); ++i) ls[static_cast<Eigen::Index>(i - 1)] = std::exp(values[i]);
  return ArdKernel(std::exp(values[0]), std::move(ls));
}

void ArdKernel::validate() const {
  if (!(amplitude > 0.0) || !std::isfinite(amplitude))
    throw ConfigurationError("kernel amplitude must be positive and finite, got " + std::to_string(amplitude));
  if (lengthscales.size() == 0) throw ConfigurationError("ARD kernel needs at least one lengthscale");
  for (Eigen::Index i = 0; i < lengthscales.size(); ++i) {
    if (!(lengthscales[i] > 0.0) || !std::isfinite(lengthscales[i]))
      throw ConfigurationError("lengthscale " + std::to_string(i) + " must be positive and finite");
  }
}

NargpKernel::NargpKernel(ArdKernel input_scale, ArdKernel lowfi, ArdKernel discrepancy)
    : input_scale(std::move(input_scale)), lowfi(std::move(lowfi)), discrepancy(std::move(discrepancy)) {}

NargpKernel NargpKernel::unit(std::size_t input_dim) {
  return NargpKernel(ArdKernel::unit(input_dim), ArdKernel::unit(1), ArdKernel::unit(input_dim));
}

double NargpKernel::operator()(std::span<const double> z, std::span<const double> z2) const {
  const std::size_t d = input_scale.input_dim();
  const auto x = z.first(d);
  const auto x2 = z2.first(d);
  return input_scale(x, x2) * lowfi(z.subspan(d, 1), z2.subspan(d, 1)) + discrepancy(x, x2);
}

double NargpKernel::eval_with_gradient(std::span<const double> z, std::span<const double> z2,
                                       std::span<double> grad) const {
  const std::size_t d = input_scale.input_dim();
  const std::size_t np = input_scale.param_count();
  const std::size_t nh = lowfi.param_count();
  const auto x = z.first(d);
  const auto x2 = z2.first(d);
  auto gp = grad.subspan(0, np);
  auto gh = grad.subspan(np, nh);
  auto gd = grad.subspan(np + nh);
  const double kp = input_scale.eval_with_gradient(x, x2, gp);
  const double kh = lowfi.eval_with_gradient(z.subspan(d, 1), z2.subspan(d, 1), gh);
  const double kd = discrepancy.eval_with_gradient(x, x2, gd);
  for (double& g : gp) g *= kh;
  for (double& g : gh) g *= kp;
  return kp * kh + kd;
}

Vector NargpKernel::log_params() const {
  Vector out(static_cast<Eigen::Index>(param_count()));
  const auto np = static_cast<Eigen::Index>(input_scale.param_count());
  const auto nh = static_cast<Eigen::Index>(lowfi.param_count());
  out.head(np) = input_scale.log_params();
  out.segment(np, nh) = lowfi.log_params();
  out.tail(static_cast<Eigen::Index>(discrepancy.param_count())) = discrepancy.log_params();
  return out;
}

NargpKernel NargpKernel::from_log_params(const NargpKernel& shape, std::span<const double> values) {
  const std::size_t np = shape.input_scale.param_count();
  const std::size_t nh = shape.lowfi.param_count();
  const std::size_t nd = shape.discrepancy.param_count();
  if (values.size() != np + nh + nd)
    throw ConfigurationError("NARGP kernel expects " + std::to_string(np + nh + nd) + " parameters, got " +
                             std::to_string(values.size()));
  return NargpKernel(ArdKernel::from_log_params(values.subspan(0, np)),
                     ArdKernel::from_log_params(values.subspan(np, nh)),
                     ArdKernel::from_log_params(values.subspan(np + nh, nd)));
}

void NargpKernel::validate() const {
  input_scale.validate();
  lowfi.validate();
  discrepancy.validate();
  if (lowfi.input_dim() != 1) throw ConfigurationError("NARGP low-fidelity block must be one-dimensional");
  if (input_scale.input_dim() != discrepancy.input_dim())
    throw ConfigurationError("NARGP input blocks disagree on the input dimension");
}

std::size_t kernel_input_dim(const Kernel& kernel) {
  return std::visit([](const auto& k) { return k.input_dim(); }, kernel);
}

std::size_t kernel_param_count(const Kernel& kernel) {
  return std::visit([](const auto& k) { return k.param_count(); }, kernel);
}

double kernel_prior_variance(const Kernel& kernel) {
  return std::visit([](const auto& k) { return k.prior_variance(); }, kernel);
}

double kernel_eval(const Kernel& kernel, std::span<const double> x, std::span<const double> x2) {
  return std::visit([&](const auto& k) { return k(x, x2); }, kernel);
}

double kernel_eval_with_gradient(const Kernel& kernel, std::span<const double> x,
                                 std::span<const double> x2, std::span<double> grad) {
  return std::visit([&](const auto& k) { return k.eval_with_gradient(x, x2, grad); }, kernel);
}

Vector kernel_log_params(const Kernel& kernel) {
  return std::visit([](const auto& k) { return k.log_params(); }, kernel);
}

Kernel kernel_with_log_params(const Kernel& shape, std::span<const double> values) {
  if (const auto* nargp = std::get_if<NargpKernel>(&shape))
    return NargpKernel::from_log_params(*nargp, values);
  const auto& ard = std::get<ArdKernel>(shape);
  if (values.size() != ard.param_count())
    throw ConfigurationError("ARD kernel expects " + std::to_string(ard.param_count()) + " parameters, got " +
                             std::to_string(values.size()));
  return ArdKernel::from_log_params(values);
}

void kernel_validate(const Kernel& kernel) {
  std::visit([](const auto& k) { k.validate(); }, kernel);
}

}  // namespace mfgp
