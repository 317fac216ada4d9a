#pragma once

// Cokriging over all fidelity levels as one multi-output GP. Cross-covariances
// use the intrinsic/linear coregionalization form
//
//   cov(f_i(x), f_j(x')) = sum_r B^(r)_ij k^(r)(x, x'),   B^(r) = a^(r) a^(r)' + diag(d^(r)),
//
// where each k^(r) is a unit-amplitude ARD kernel with its own lengthscales
// and d^(r) >= 0. Every B^(r) is PSD, so the joint Gram matrix is PSD too.

#include "mfgp/dataset.hpp"
#include "mfgp/estimators.hpp"
#include "mfgp/gp.hpp"

#include <vector>

namespace mfgp {

struct CokrigingHyperparams {
  /// lengthscales[r] has one entry per input dimension.
  std::vector<Vector> lengthscales;
  /// K x R; column r is a^(r).
  Matrix loadings;
  /// K x R, nonnegative; column r is d^(r).
  Matrix diagonals;
  /// Per-level observation noise standard deviation.
  Vector noise_std;
  /// Per-level constant means.
  Vector means;

  std::size_t num_levels() const { return static_cast<std::size_t>(noise_std.size()); }
  std::size_t rank() const { return lengthscales.size(); }
  std::size_t input_dim() const { return lengthscales.empty() ? 0 : static_cast<std::size_t>(lengthscales[0].size()); }
  /// B^(r) as a dense K x K matrix.
  Matrix coefficient_matrix(std::size_t r) const;
  void validate() const;
};

/// Layout: for each r, log lengthscales (d) then a^(r) (K) then log d^(r) (K);
/// then log noise (K, floored at the single-GP noise floor); then means (K).
std::size_t cokriging_unconstrained_size(std::size_t num_levels, std::size_t rank, std::size_t input_dim);
Vector cokriging_to_unconstrained(const CokrigingHyperparams& hp);
CokrigingHyperparams cokriging_from_unconstrained(std::size_t num_levels, std::size_t rank, std::size_t input_dim,
                                                  const Vector& values);

/// Joint prior covariance of the stacked levels (level 1 rows first). With
/// include_noise the per-level noise variances are added on the diagonal.
Matrix cokriging_gram(const std::vector<Matrix>& inputs, const CokrigingHyperparams& hp, bool include_noise);

/// Joint log marginal likelihood of the stacked targets.
double cokriging_log_ml(const std::vector<Matrix>& inputs, const std::vector<Vector>& targets,
                        const CokrigingHyperparams& hp);

struct CokrigingEvaluation {
  double log_ml;
  Vector gradient;  // with respect to the unconstrained layout
};
CokrigingEvaluation cokriging_value_and_gradient(const std::vector<Matrix>& inputs, const std::vector<Vector>& targets,
                                                 const CokrigingHyperparams& hp);

namespace serial {
/// Block-by-block reference assembly of cokriging_gram.
Matrix cokriging_gram(const std::vector<Matrix>& inputs, const CokrigingHyperparams& hp, bool include_noise);
}  // namespace serial

class CokrigingModel final : public MFModel {
 public:
  EstimatorKind kind() const override { return EstimatorKind::Cokriging; }
  std::size_t input_dim() const override { return input_.dim(); }
  PosteriorPrediction predict(const Matrix& queries) const override;
  double log_ml() const override { return log_ml_; }

  const Standardizer& input() const { return input_; }
  const CokrigingHyperparams& hyperparams() const { return hp_; }
  /// Standardized training inputs per level, level 1 first.
  const std::vector<Matrix>& features() const { return features_; }
  const std::vector<Vector>& targets() const { return targets_; }

  CokrigingModel(Standardizer input, std::vector<Matrix> features, std::vector<Vector> targets,
                 CokrigingHyperparams hp);

 private:
  Standardizer input_;
  std::vector<Matrix> features_;
  std::vector<Vector> targets_;
  CokrigingHyperparams hp_;
  Matrix chol_;
  Vector weights_;
  double log_ml_ = 0.0;
};

/// Throws CapacityError when the total point count exceeds
/// opts.cokriging_max_points.
CokrigingModel train_cokriging(const MFDataset& data, const EstimatorOptions& opts);
inline PosteriorPrediction predict_cokriging(const CokrigingModel& model, const Matrix& queries) {
  return model.predict(queries);
}

}  // namespace mfgp
