#pragma once

// Point-estimate regressors used as low-fidelity surrogates.

#include "mfgp/gp.hpp"
#include "mfgp/hyperopt.hpp"
#include "mfgp/types.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace mfgp {

/// Any deterministic regressor with a single-valued output. Implementations are
/// immutable after construction, so predict() is pure and thread-safe.
class PointPredictor {
 public:
  virtual ~PointPredictor() = default;
  virtual std::string_view kind() const = 0;
  virtual std::size_t input_dim() const = 0;
  /// One prediction per query row. Throws ConfigurationError on width mismatch.
  virtual Vector predict(const Matrix& queries) const = 0;
};

using PredictorPtr = std::shared_ptr<const PointPredictor>;

/// Exact k-nearest-neighbour regression under Euclidean distance. Neighbours are
/// ranked by (squared distance, stored index), so ties go to the lowest index,
/// and the prediction is the unweighted mean of their targets summed in rank
/// order. Queries go through a k-d tree; results are identical to an exhaustive
/// scan.
class KnnModel final : public PointPredictor {
 public:
  KnnModel(Matrix features, Vector targets, std::size_t k);

  std::string_view kind() const override { return "knn"; }
  std::size_t input_dim() const override { return static_cast<std::size_t>(features_.cols()); }
  Vector predict(const Matrix& queries) const override;

  std::size_t k() const { return k_; }
  const Matrix& features() const { return features_; }
  const Vector& targets() const { return targets_; }

  /// Indices of the k nearest stored rows of one query, in rank order.
  std::vector<std::size_t> neighbours(const double* query) const;

 private:
  struct Node {
    std::int32_t begin, end;   // range in order_
    std::int32_t left, right;  // children, -1 for leaves
    std::int32_t dim;
    double split;
  };
  std::int32_t build(std::int32_t begin, std::int32_t end);

  Matrix features_;
  Vector targets_;
  std::size_t k_;
  Matrix points_;  // d x N, one contiguous column per stored row
  std::vector<std::int32_t> order_;
  std::vector<Node> nodes_;
};

inline constexpr std::size_t kDefaultKnnNeighbours = 5;

/// Throws ConfigurationError unless 1 <= k <= rows.
KnnModel knn_fit(const Matrix& features, const Vector& targets, std::size_t k = kDefaultKnnNeighbours);
inline Vector knn_predict(const KnnModel& model, const Matrix& queries) { return model.predict(queries); }

/// Reference implementation: O(N M) scan with the same ranking rule.
Vector knn_scan_predict(const Matrix& features, const Vector& targets, std::size_t k, const Matrix& queries);

/// Affine least squares. weights = (w_1..w_m, intercept).
class LinearModel final : public PointPredictor {
 public:
  explicit LinearModel(Vector weights) : weights_(std::move(weights)) {}

  std::string_view kind() const override { return "linear"; }
  std::size_t input_dim() const override { return static_cast<std::size_t>(weights_.size() - 1); }
  Vector predict(const Matrix& queries) const override;

  const Vector& weights() const { return weights_; }

 private:
  Vector weights_;
};

/// Minimum-norm least-squares fit with intercept (complete orthogonal
/// decomposition), so rank-deficient designs are handled without error.
LinearModel linreg_fit(const Matrix& features, const Vector& targets);
inline Vector linreg_predict(const LinearModel& model, const Matrix& queries) { return model.predict(queries); }

/// Exposes only the posterior mean of a trained GP.
class GpMeanPredictor final : public PointPredictor {
 public:
  explicit GpMeanPredictor(TrainedGP gp) : gp_(std::move(gp)) {}

  std::string_view kind() const override { return "gp"; }
  std::size_t input_dim() const override { return gp_.feature_dim(); }
  Vector predict(const Matrix& queries) const override { return gp_.predict_mean(queries); }

  const TrainedGP& gp() const { return gp_; }

 private:
  TrainedGP gp_;
};

PredictorPtr gp_mean_wrapper(TrainedGP gp);

enum class SurrogateKind { Gp, Knn, Linear };

const char* to_string(SurrogateKind kind);
SurrogateKind surrogate_kind_from_string(const std::string& name);

struct SurrogateSpec {
  SurrogateKind kind = SurrogateKind::Gp;
  std::size_t knn_k = kDefaultKnnNeighbours;
  MeanKind gp_mean = MeanKind::Constant;
};

/// Trains the requested surrogate; GP surrogates use an ARD kernel and `cfg`.
PredictorPtr train_surrogate(const SurrogateSpec& spec, const Matrix& features, const Vector& targets,
                             const OptimizerConfig& cfg);

}  // namespace mfgp
