#pragma once

// Multifidelity estimators. Every model trains from an MFDataset (level 1 =
// highest fidelity) and predicts the level-1 posterior in raw output units.
//
// Preprocessing shared by all estimators: each regression step standardizes its
// own feature matrix with statistics of its own training set and centers its
// targets by their mean; the same transforms are replayed at prediction time.

#include "mfgp/dataset.hpp"
#include "mfgp/gp.hpp"
#include "mfgp/hyperopt.hpp"
#include "mfgp/surrogates.hpp"

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mfgp {

enum class EstimatorKind { Proposed, Koh, Nargp, Cokriging, Kriging };

const char* to_string(EstimatorKind kind);
EstimatorKind estimator_kind_from_string(const std::string& name);

class SurrogateCache;

struct EstimatorOptions {
  OptimizerConfig optimizer;
  /// Low-fidelity surrogate per level, index 0 = level 2. Empty means a GP at
  /// every level; a single entry applies to all low-fidelity levels.
  std::vector<SurrogateSpec> surrogates;
  /// KOH ablation: pin every rho at 0.
  bool koh_fix_rho_zero = false;
  /// Number of shared kernels in the cokriging coregionalization model.
  std::size_t cokriging_rank = 2;
  /// Hard limit on the total number of points in the joint cokriging solve.
  std::size_t cokriging_max_points = 5000;
  /// Optional memo of trained level surrogates shared between estimators.
  std::shared_ptr<SurrogateCache> surrogate_cache;

  const SurrogateSpec& surrogate_for_level(std::size_t level, std::size_t num_levels) const;
};

/// Deterministic per-step seed stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Common interface of trained multifidelity models. Immutable after training.
class MFModel {
 public:
  virtual ~MFModel() = default;
  virtual EstimatorKind kind() const = 0;
  virtual std::size_t input_dim() const = 0;
  /// Level-1 posterior mean and variance at raw inputs.
  virtual PosteriorPrediction predict(const Matrix& queries) const = 0;
  /// Log marginal likelihood of the model's level-1 GP (centered targets).
  virtual double log_ml() const = 0;

 protected:
  void check_queries(const Matrix& queries) const;
};

/// A trained point predictor together with the preprocessing it was trained
/// under: predict(raw) = predictor(input.apply(raw)) + target_offset.
struct LevelSurrogate {
  Standardizer input;
  double target_offset = 0.0;
  PredictorPtr predictor;

  std::size_t input_dim() const { return input.dim(); }
  Vector predict(const Matrix& raw_features) const;
};

/// Fits a LevelSurrogate on raw features/targets.
LevelSurrogate train_level_surrogate(const SurrogateSpec& spec, const Matrix& raw_features, const Vector& targets,
                                     const OptimizerConfig& cfg);

/// Trained level surrogates keyed by everything that determines them: the
/// surrogate spec, the optimizer settings (seed included), the raw features and
/// the targets. A hit returns exactly what training would have produced.
/// Safe for concurrent use.
class SurrogateCache {
 public:
  std::optional<LevelSurrogate> find(const SurrogateSpec& spec, const Matrix& raw_features, const Vector& targets,
                                     const OptimizerConfig& cfg) const;
  void insert(const SurrogateSpec& spec, const Matrix& raw_features, const Vector& targets,
              const OptimizerConfig& cfg, const LevelSurrogate& surrogate);
  std::size_t size() const;
  std::size_t hits() const;

 private:
  struct Entry {
    SurrogateSpec spec;
    OptimizerConfig cfg;
    Matrix features;
    Vector targets;
    LevelSurrogate surrogate;
  };
  mutable std::mutex mutex_;
  std::vector<Entry> entries_;
  mutable std::size_t hits_ = 0;
};

/// train_level_surrogate through `cache` when it is non-null.
LevelSurrogate train_level_surrogate(const SurrogateSpec& spec, const Matrix& raw_features, const Vector& targets,
                                     const OptimizerConfig& cfg, SurrogateCache* cache);

/// Recursive feature map: starting from X, appends one column per surrogate,
/// each surrogate evaluated on the columns built so far. `chain` is ordered
/// from the lowest fidelity (h_K) upward. Throws ConfigurationError on a width
/// mismatch.
Matrix build_features(const Matrix& inputs, std::span<const LevelSurrogate> chain);

// ---------------------------------------------------------------------------
// Feature-augmented GP: h_K..h_2 are trained in sequence, each on the inputs
// augmented with the predictions of all lower levels, and the level-1 GP uses
// an ARD kernel and a linear mean over all d + K - 1 columns.

class ProposedModel final : public MFModel {
 public:
  EstimatorKind kind() const override { return EstimatorKind::Proposed; }
  std::size_t input_dim() const override { return input_dim_; }
  PosteriorPrediction predict(const Matrix& queries) const override;
  double log_ml() const override { return top_.log_marginal_likelihood(); }

  /// h_K, ..., h_2.
  const std::vector<LevelSurrogate>& lowfi() const { return lowfi_; }
  const Standardizer& top_input() const { return top_input_; }
  double target_offset() const { return target_offset_; }
  const TrainedGP& top() const { return top_; }
  /// Standardized level-1 features fed to the top GP.
  Matrix top_features(const Matrix& inputs) const;

  ProposedModel(std::size_t input_dim, std::vector<LevelSurrogate> lowfi, Standardizer top_input,
                double target_offset, TrainedGP top);

 private:
  std::size_t input_dim_;
  std::vector<LevelSurrogate> lowfi_;
  Standardizer top_input_;
  double target_offset_;
  TrainedGP top_;
};

/// With K = 1 there are no low-fidelity columns and the model is exactly the
/// kriging baseline (ARD kernel, constant mean).
ProposedModel train_proposed(const MFDataset& data, const EstimatorOptions& opts);
inline PosteriorPrediction predict_proposed(const ProposedModel& model, const Matrix& queries) {
  return model.predict(queries);
}

// ---------------------------------------------------------------------------
// Kennedy-O'Hagan: h_l(x) = rho_l h_{l+1}(x) + delta_l(x), with delta_l a GP
// (ARD kernel, constant mean) on the residual of y_l against the level-(l+1)
// surrogate evaluated at X_l. rho_l is optimized jointly with delta_l.

struct KohLevel {
  double rho = 0.0;
  Standardizer input;
  double target_offset = 0.0;   // mean of y_l
  double lowfi_offset = 0.0;    // mean of h_{l+1}(X_l)
  TrainedGP delta;
};

class KohModel final : public MFModel {
 public:
  EstimatorKind kind() const override { return EstimatorKind::Koh; }
  std::size_t input_dim() const override { return base_.input_dim(); }
  PosteriorPrediction predict(const Matrix& queries) const override;
  double log_ml() const override { return levels_.back().delta.log_marginal_likelihood(); }

  const LevelSurrogate& base() const { return base_; }
  /// Levels K-1, ..., 1.
  const std::vector<KohLevel>& levels() const { return levels_; }

  KohModel(LevelSurrogate base, std::vector<KohLevel> levels);

 private:
  LevelSurrogate base_;
  std::vector<KohLevel> levels_;
};

/// Requires K >= 2.
KohModel train_koh(const MFDataset& data, const EstimatorOptions& opts);
inline PosteriorPrediction predict_koh(const KohModel& model, const Matrix& queries) { return model.predict(queries); }

// ---------------------------------------------------------------------------
// NARGP: level l is a zero-mean GP over [x, h_{l+1}(x)] with the composite
// kernel k_p(x,x') k_h(h,h') + k_delta(x,x'). Lower-level posterior means are
// propagated as points.

struct NargpLevel {
  Standardizer input;   // over the d + 1 columns [x, h]
  double target_offset = 0.0;
  TrainedGP gp;
};

class NargpModel final : public MFModel {
 public:
  EstimatorKind kind() const override { return EstimatorKind::Nargp; }
  std::size_t input_dim() const override { return base_.input_dim(); }
  PosteriorPrediction predict(const Matrix& queries) const override;
  double log_ml() const override { return levels_.back().gp.log_marginal_likelihood(); }

  const LevelSurrogate& base() const { return base_; }
  /// Levels K-1, ..., 1.
  const std::vector<NargpLevel>& levels() const { return levels_; }

  NargpModel(LevelSurrogate base, std::vector<NargpLevel> levels);

 private:
  LevelSurrogate base_;
  std::vector<NargpLevel> levels_;
};

/// Requires K >= 2.
NargpModel train_nargp(const MFDataset& data, const EstimatorOptions& opts);
inline PosteriorPrediction predict_nargp(const NargpModel& model, const Matrix& queries) {
  return model.predict(queries);
}

// ---------------------------------------------------------------------------
// Single-fidelity kriging: ARD kernel and constant mean on level 1 only.

class KrigingModel final : public MFModel {
 public:
  EstimatorKind kind() const override { return EstimatorKind::Kriging; }
  std::size_t input_dim() const override { return input_.dim(); }
  PosteriorPrediction predict(const Matrix& queries) const override;
  double log_ml() const override { return gp_.log_marginal_likelihood(); }

  const Standardizer& input() const { return input_; }
  double target_offset() const { return target_offset_; }
  const TrainedGP& gp() const { return gp_; }

  KrigingModel(Standardizer input, double target_offset, TrainedGP gp);

 private:
  Standardizer input_;
  double target_offset_;
  TrainedGP gp_;
};

KrigingModel train_kriging(const DataSet& data, const OptimizerConfig& cfg);

}  // namespace mfgp
