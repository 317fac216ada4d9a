#include "mfgp/gp.hpp"

#include "mfgp/gram.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace mfgp {

void GPHyperparams::validate(std::size_t feature_dim) const {
  kernel_validate(kernel);
  if (kernel_input_dim(kernel) != feature_dim)
    throw ConfigurationError("kernel expects " + std::to_string(kernel_input_dim(kernel)) +
                             " features, data has " + std::to_string(feature_dim));
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std))
    throw ConfigurationError("noise_std must be nonnegative and finite");
  mean.check_features(feature_dim);
  if (!mean.coefficients.allFinite()) throw ConfigurationError("mean coefficients must be finite");
}

std::size_t unconstrained_size(const GPHyperparams& hp) {
  return kernel_param_count(hp.kernel) + 1 + hp.mean.arity();
}

UnconstrainedParams to_unconstrained(const GPHyperparams& hp) {
  UnconstrainedParams out;
  const Vector kp = kernel_log_params(hp.kernel);
  out.values.resize(static_cast<Eigen::Index>(unconstrained_size(hp)));
  out.values.head(kp.size()) = kp;
  if (hp.noise_std < kNoiseFloor) {
    out.values[kp.size()] = std::log(kNoiseFloor);
    out.noise_floored = true;
  } else {
    out.values[kp.size()] = std::log(hp.noise_std);
  }
  out.values.tail(static_cast<Eigen::Index>(hp.mean.arity())) = hp.mean.coefficients;
  return out;
}

GPHyperparams from_unconstrained(const GPHyperparams& shape, const Vector& values) {
  if (static_cast<std::size_t>(values.size()) != unconstrained_size(shape))
    throw ConfigurationError("expected " + std::to_string(unconstrained_size(shape)) +
                             " unconstrained parameters, got " + std::to_string(values.size()));
  if (!values.allFinite()) throw NumericalError("non-finite unconstrained parameter vector");
  const auto nk = static_cast<Eigen::Index>(kernel_param_count(shape.kernel));
  GPHyperparams hp;
  hp.kernel = kernel_with_log_params(shape.kernel, {values.data(), static_cast<std::size_t>(nk)});
  hp.noise_std = std::exp(values[nk]);
  hp.mean = {shape.mean.kind, values.tail(static_cast<Eigen::Index>(shape.mean.arity()))};
  return hp;
}

namespace {

constexpr Eigen::Index kBlock = 128;

Matrix lower_inverse(const Eigen::Ref<const Matrix>& L) {
  const Eigen::Index n = L.rows();
  if (n <= kBlock) return L.triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n));
  const Eigen::Index h = n / 2, m = n - h;
  Matrix out = Matrix::Zero(n, n);
  out.topLeftCorner(h, h) = lower_inverse(L.topLeftCorner(h, h));
  out.bottomRightCorner(m, m) = lower_inverse(L.bottomRightCorner(m, m));
  const Matrix BA = L.bottomLeftCorner(m, h) * out.topLeftCorner(h, h).triangularView<Eigen::Lower>();
  out.bottomLeftCorner(m, h).noalias() = -(out.bottomRightCorner(m, m).triangularView<Eigen::Lower>() * BA);
  return out;
}

// T' T for lower-triangular T.
Matrix lower_gram(const Eigen::Ref<const Matrix>& T) {
  const Eigen::Index n = T.rows();
  if (n <= kBlock) {
    const Matrix Tl = T.triangularView<Eigen::Lower>();
    return Tl.transpose() * Tl;
  }
  const Eigen::Index h = n / 2, m = n - h;
  Matrix out(n, n);
  out.topLeftCorner(h, h) = lower_gram(T.topLeftCorner(h, h));
  out.topLeftCorner(h, h).noalias() += T.bottomLeftCorner(m, h).transpose() * T.bottomLeftCorner(m, h);
  out.bottomLeftCorner(m, h).noalias() =
      T.bottomRightCorner(m, m).triangularView<Eigen::Lower>().transpose() * T.bottomLeftCorner(m, h);
  out.topRightCorner(h, m) = out.bottomLeftCorner(m, h).transpose();
  out.bottomRightCorner(m, m) = lower_gram(T.bottomRightCorner(m, m));
  return out;
}

}  // namespace

Matrix inverse_from_cholesky(const Matrix& L) { return lower_gram(lower_inverse(L)); }

JitteredCholesky cholesky_with_jitter(const Matrix& A, double scale) {
  const Eigen::Index n = A.rows();
  if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;
  double jitter = kJitterStart * scale;
  const double max_jitter = kJitterMax * scale * (1.0 + 1e-12);
  Matrix work;
  for (;;) {
    work = A;
    work.diagonal().array() += jitter;
    Eigen::LLT<Eigen::Ref<Matrix>> llt(work);
    if (llt.info() == Eigen::Success && work.diagonal().minCoeff() > 0.0) {
      work.triangularView<Eigen::StrictlyUpper>().setZero();
      return {std::move(work), jitter};
    }
    if (jitter * 10.0 > max_jitter) break;
    jitter *= 10.0;
  }
  throw NumericalError("Cholesky factorization of a " + std::to_string(n) + "x" + std::to_string(n) +
                           " Gram matrix failed at jitter " + std::to_string(jitter),
                       jitter);
}

TrainedGP fit_gp(const Matrix& features, const Vector& targets, const GPHyperparams& hp) {
  if (features.rows() < 1) throw ConfigurationError("GP needs at least one training point");
  if (features.rows() != targets.size())
    throw ConfigurationError("feature rows (" + std::to_string(features.rows()) + ") and targets (" +
                             std::to_string(targets.size()) + ") disagree");
  if (!features.allFinite() || !targets.allFinite()) throw ConfigurationError("non-finite training data");
  hp.validate(static_cast<std::size_t>(features.cols()));

  TrainedGP gp;
  gp.features_ = features;
  gp.targets_ = targets;
  gp.hp_ = hp;
  gp.centered_targets_ = targets - hp.mean.evaluate(features);

  Matrix K = kernel_matrix(features, hp.kernel);
  const double scale = K.diagonal().mean();
  K.diagonal().array() += hp.noise_std * hp.noise_std;
  auto chol = cholesky_with_jitter(K, scale);
  gp.chol_ = std::move(chol.lower);
  gp.jitter_ = chol.jitter;
  gp.jitter_scale_ = scale;

  gp.weights_ = gp.chol_.triangularView<Eigen::Lower>().solve(gp.centered_targets_);
  gp.chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(gp.weights_);
  return gp;
}

// Each query is handled on its own column so that a batch prediction equals
// the concatenation of single-query predictions bit for bit.
PosteriorPrediction TrainedGP::posterior(const Matrix& queries) const {
  if (queries.cols() != features_.cols())
    throw ConfigurationError("query width " + std::to_string(queries.cols()) + " does not match GP feature width " +
                             std::to_string(features_.cols()));
  const Matrix Kxq = kernel_matrix(features_, queries, hp_.kernel);
  const Matrix Q = queries.transpose();
  PosteriorPrediction out;
  out.mean = hp_.mean.evaluate(queries);
  out.variance.resize(queries.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    Vector v = Kxq.col(i);
    out.mean[i] += v.dot(weights_);
    chol_.triangularView<Eigen::Lower>().solveInPlace(v);
    const std::span<const double> q(Q.data() + i * Q.rows(), static_cast<std::size_t>(Q.rows()));
    const double var = kernel_eval(hp_.kernel, q, q) - v.squaredNorm();
    out.variance[i] = var > 0.0 ? var : 0.0;
  }
  return out;
}

Vector TrainedGP::predict_mean(const Matrix& queries) const {
  if (queries.cols() != features_.cols())
    throw ConfigurationError("query width " + std::to_string(queries.cols()) + " does not match GP feature width " +
                             std::to_string(features_.cols()));
  const Matrix Kxq = kernel_matrix(features_, queries, hp_.kernel);
  Vector out = hp_.mean.evaluate(queries);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < queries.rows(); ++i) out[i] += Kxq.col(i).dot(weights_);
  return out;
}

double TrainedGP::log_marginal_likelihood() const {
  const double n = static_cast<double>(features_.rows());
  const double log_det = 2.0 * chol_.diagonal().array().log().sum();
  return -0.5 * (centered_targets_.dot(weights_) + log_det + n * std::log(2.0 * std::numbers::pi));
}

Vector mll_gradient(const TrainedGP& gp) {
  const Eigen::Index n = static_cast<Eigen::Index>(gp.size());
  const GPHyperparams& hp = gp.hyperparams();

  // W = alpha alpha' - C^-1
  Matrix W = -inverse_from_cholesky(gp.chol_factor());
  W.noalias() += gp.weights() * gp.weights().transpose();

  const auto nk = static_cast<Eigen::Index>(kernel_param_count(hp.kernel));
  Vector grad(static_cast<Eigen::Index>(unconstrained_size(hp)));
  const double trace_w = W.trace();
  // The jitter is proportional to mean(diag K), so it moves with the kernel
  // parameters; folding tr(W) * jitter / (n * scale) onto the diagonal of W
  // adds its contribution inside the same contraction.
  const double scale = gp.jitter_scale();
  Matrix Wj = W;
  if (scale > 0.0 && std::isfinite(scale))
    Wj.diagonal().array() += trace_w * gp.jitter_used() / (scale * static_cast<double>(n));
  grad.head(nk) = 0.5 * contract_kernel_gradient(gp.features(), hp.kernel, Wj);
  grad[nk] = hp.noise_std * hp.noise_std * trace_w;
  if (hp.mean.arity() > 0)
    grad.tail(static_cast<Eigen::Index>(hp.mean.arity())) = hp.mean.jacobian(gp.features()).transpose() * gp.weights();
  if (!grad.allFinite()) throw NumericalError("non-finite marginal-likelihood gradient", gp.jitter_used());
  return grad;
}

MllEvaluation mll_value_and_gradient(const Matrix& features, const Vector& targets, const GPHyperparams& shape,
                                     const Vector& unconstrained) {
  const TrainedGP gp = fit_gp(features, targets, from_unconstrained(shape, unconstrained));
  return {gp.log_marginal_likelihood(), mll_gradient(gp)};
}

}  // namespace mfgp
