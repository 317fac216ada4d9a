#pragma once

#include "mfgp/kernels.hpp"
#include "mfgp/means.hpp"
#include "mfgp/types.hpp"

#include <cstddef>

namespace mfgp {

/// Everything a GP needs besides data: kernel (with its parameters), prior
/// mean (with its coefficients) and the white-noise standard deviation.
struct GPHyperparams {
  Kernel kernel;
  MeanFunction mean;
  double noise_std = 0.0;

  /// Checks positivity constraints and that kernel/mean fit `feature_dim`.
  void validate(std::size_t feature_dim) const;
};

// ---------------------------------------------------------------------------
// Unconstrained parameterization.
//
// Layout (fixed): kernel log-parameters in the kernel's own order, then
// log(noise_std), then the mean coefficients untransformed. For an ARD kernel
// over m features that is (log b, log lambda_1..m, log sigma, mean...), of
// length 2 + m + arity.

/// log(noise_std) is floored at log(kNoiseFloor) so a noiseless model still maps
/// to a finite coordinate.
inline constexpr double kNoiseFloor = 1e-8;

struct UnconstrainedParams {
  Vector values;
  bool noise_floored = false;
};

std::size_t unconstrained_size(const GPHyperparams& hp);
UnconstrainedParams to_unconstrained(const GPHyperparams& hp);
/// `shape` supplies kernel block sizes and the mean kind.
GPHyperparams from_unconstrained(const GPHyperparams& shape, const Vector& values);

// ---------------------------------------------------------------------------

/// Jitter schedule for Gram factorizations: the first attempt adds
/// kJitterStart * mean(diag K), each failure multiplies by 10, and the last
/// attempt uses kJitterMax * mean(diag K).
inline constexpr double kJitterStart = 1e-10;
inline constexpr double kJitterMax = 1e-2;

struct JitteredCholesky {
  Matrix lower;   // L with L L^T = A + jitter I
  double jitter;  // absolute diagonal inflation that succeeded
};

/// Factors A + jitter*I following the schedule above, where `scale` is
/// mean(diag K) of the noise-free kernel matrix. Throws NumericalError carrying
/// the last attempted jitter when every attempt fails.
JitteredCholesky cholesky_with_jitter(const Matrix& A, double scale);

/// (L L')^-1 from a lower Cholesky factor, by blocked triangular inversion.
Matrix inverse_from_cholesky(const Matrix& L);

struct PosteriorPrediction {
  Vector mean;
  Vector variance;
};

/// A GP conditioned on its training set. Immutable once fitted.
class TrainedGP {
 public:
  const Matrix& features() const { return features_; }
  /// Training targets as passed to fit_gp.
  const Vector& targets() const { return targets_; }
  /// Training targets minus the prior mean at the training features.
  const Vector& centered_targets() const { return centered_targets_; }
  const Matrix& chol_factor() const { return chol_; }
  /// Solution of (K + sigma^2 I) weights = centered targets.
  const Vector& weights() const { return weights_; }
  const GPHyperparams& hyperparams() const { return hp_; }
  double jitter_used() const { return jitter_; }
  /// mean(diag K) of the noise-free Gram matrix the jitter was scaled by.
  double jitter_scale() const { return jitter_scale_; }

  std::size_t size() const { return static_cast<std::size_t>(features_.rows()); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features_.cols()); }

  PosteriorPrediction posterior(const Matrix& queries) const;
  /// Posterior mean only.
  Vector predict_mean(const Matrix& queries) const;
  double log_marginal_likelihood() const;

 private:
  friend TrainedGP fit_gp(const Matrix& features, const Vector& targets, const GPHyperparams& hp);
  Matrix features_;
  Vector targets_;
  Vector centered_targets_;
  Matrix chol_;
  Vector weights_;
  GPHyperparams hp_;
  double jitter_ = 0.0;
  double jitter_scale_ = 0.0;
};

TrainedGP fit_gp(const Matrix& features, const Vector& targets, const GPHyperparams& hp);

inline PosteriorPrediction posterior(const TrainedGP& gp, const Matrix& queries) {
  return gp.posterior(queries);
}

/// -1/2 [y~' alpha + 2 sum log L_ii + N log 2 pi], from the stored factor.
inline double log_marginal_likelihood(const TrainedGP& gp) { return gp.log_marginal_likelihood(); }

/// Gradient of the log marginal likelihood of a fitted GP with respect to the
/// unconstrained coordinates of its hyperparameters:
///   kernel:  1/2 tr((alpha alpha' - C^-1) dK/dtheta)
///   noise:   sigma^2 tr(alpha alpha' - C^-1)
///   mean:    J' alpha
/// Throws NumericalError on non-finite entries.
Vector mll_gradient(const TrainedGP& gp);

struct MllEvaluation {
  double log_ml;
  Vector gradient;
};

/// Fits at the given unconstrained point and returns log-ML and its gradient.
MllEvaluation mll_value_and_gradient(const Matrix& features, const Vector& targets, const GPHyperparams& shape,
                                     const Vector& unconstrained);

inline Vector mll_gradient(const Matrix& features, const Vector& targets, const GPHyperparams& shape,
                           const Vector& unconstrained) {
  return mll_value_and_gradient(features, targets, shape, unconstrained).gradient;
}

}  // namespace mfgp
