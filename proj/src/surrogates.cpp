#include "mfgp/surrogates.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <numeric>
#include <queue>

namespace mfgp {
namespace {

constexpr std::int32_t kLeafSize = 16;

struct Candidate {
  double d2;
  std::size_t index;
};

bool ranks_before(const Candidate& a, const Candidate& b) {
  return a.d2 < b.d2 || (a.d2 == b.d2 && a.index < b.index);
}

// Shared by the tree and the scan so both see bitwise-identical distances.
inline double squared_distance(const double* q, const double* x, Eigen::Index d, Eigen::Index stride) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < d; ++c) {
    const double diff = q[c] - x[c * stride];
    s += diff * diff;
  }
  return s;
}

double mean_in_rank_order(std::vector<Candidate>& cands, const Vector& targets) {
  std::sort(cands.begin(), cands.end(), ranks_before);
  double sum = 0.0;
  for (const auto& c : cands) sum += targets[static_cast<Eigen::Index>(c.index)];
  return sum / static_cast<double>(cands.size());
}

void check_query_width(const Matrix& queries, std::size_t width) {
  if (static_cast<std::size_t>(queries.cols()) != width)
    throw ConfigurationError("query width " + std::to_string(queries.cols()) + " does not match model width " +
                             std::to_string(width));
}

}  // namespace

KnnModel::KnnModel(Matrix features, Vector targets, std::size_t k)
    : features_(std::move(features)), targets_(std::move(targets)), k_(k) {
  if (features_.rows() != targets_.size()) throw ConfigurationError("KNN features and targets differ in length");
  if (k_ < 1) throw ConfigurationError("KNN needs k >= 1");
  if (k_ > static_cast<std::size_t>(features_.rows()))
    throw ConfigurationError("KNN k = " + std::to_string(k_) + " exceeds the " + std::to_string(features_.rows()) +
                             " stored rows");
  if (features_.rows() > std::numeric_limits<std::int32_t>::max() / 2)
    throw CapacityError("KNN supports at most 2^30 stored rows");
  points_ = features_.transpose();
  order_.resize(static_cast<std::size_t>(features_.rows()));
  std::iota(order_.begin(), order_.end(), 0);
  build(0, static_cast<std::int32_t>(order_.size()));
}

std::int32_t KnnModel::build(std::int32_t begin, std::int32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end, -1, -1, 0, 0.0});
  if (end - begin <= kLeafSize) return id;

  const Eigen::Index d = points_.rows();
  Eigen::Index best_dim = 0;
  double best_spread = -1.0;
  for (Eigen::Index c = 0; c < d; ++c) {
    double lo = points_(c, order_[static_cast<std::size_t>(begin)]);
    double hi = lo;
    for (std::int32_t i = begin; i < end; ++i) {
      const double v = points_(c, order_[static_cast<std::size_t>(i)]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      best_dim = c;
    }
  }
  const std::int32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::int32_t a, std::int32_t b) { return points_(best_dim, a) < points_(best_dim, b); });
  const double split = points_(best_dim, order_[static_cast<std::size_t>(mid)]);
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)] = {begin, end, left, right, static_cast<std::int32_t>(best_dim), split};
  return id;
}

std::vector<std::size_t> KnnModel::neighbours(const double* query) const {
  const Eigen::Index d = points_.rows();
  auto cmp = [](const Candidate& a, const Candidate& b) { return ranks_before(a, b); };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(cmp)> heap(cmp);  // top = worst kept

  auto consider = [&](std::size_t idx) {
    const Candidate c{squared_distance(query, points_.data() + static_cast<Eigen::Index>(idx) * d, d, 1), idx};
    if (heap.size() < k_) {
      heap.push(c);
    } else if (ranks_before(c, heap.top())) {
      heap.pop();
      heap.push(c);
    }
  };

  auto visit = [&](auto&& self, std::int32_t id) -> void {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.left < 0) {
      for (std::int32_t i = node.begin; i < node.end; ++i) consider(static_cast<std::size_t>(order_[static_cast<std::size_t>(i)]));
      return;
    }
    const double diff = query[node.dim] - node.split;
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    self(self, near);
    // Equality must be explored: an equidistant point may carry a lower index.
    if (heap.size() < k_ || diff * diff <= heap.top().d2) self(self, far);
  };
  visit(visit, 0);

  std::vector<Candidate> cands;
  cands.reserve(k_);
  while (!heap.empty()) {
    cands.push_back(heap.top());
    heap.pop();
  }
  std::sort(cands.begin(), cands.end(), ranks_before);
  std::vector<std::size_t> out;
  out.reserve(cands.size());
  for (const auto& c : cands) out.push_back(c.index);
  return out;
}

Vector KnnModel::predict(const Matrix& queries) const {
  check_query_width(queries, input_dim());
  const Matrix Q = queries.transpose();
  const Eigen::Index m = queries.rows();
  Vector out(m);
#pragma omp parallel for schedule(dynamic, 64)
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto idx = neighbours(Q.data() + i * Q.rows());
    double sum = 0.0;
    for (std::size_t j : idx) sum += targets_[static_cast<Eigen::Index>(j)];
    out[i] = sum / static_cast<double>(idx.size());
  }
  return out;
}

KnnModel knn_fit(const Matrix& features, const Vector& targets, std::size_t k) {
  return KnnModel(features, targets, k);
}

Vector knn_scan_predict(const Matrix& features, const Vector& targets, std::size_t k, const Matrix& queries) {
  if (k < 1 || k > static_cast<std::size_t>(features.rows())) throw ConfigurationError("invalid k for KNN scan");
  check_query_width(queries, static_cast<std::size_t>(features.cols()));
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  Vector out(queries.rows());
  std::vector<Candidate> all(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    const Vector q = queries.row(i).transpose();
    for (Eigen::Index j = 0; j < n; ++j)
      all[static_cast<std::size_t>(j)] = {squared_distance(q.data(), &features(j, 0), d, features.rows()),
                                          static_cast<std::size_t>(j)};
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), ranks_before);
    std::vector<Candidate> best(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
    out[i] = mean_in_rank_order(best, targets);
  }
  return out;
}

Vector LinearModel::predict(const Matrix& queries) const {
  check_query_width(queries, input_dim());
  Vector out = queries * weights_.head(weights_.size() - 1);
  out.array() += weights_[weights_.size() - 1];
  return out;
}

LinearModel linreg_fit(const Matrix& features, const Vector& targets) {
  if (features.rows() < 1) throw ConfigurationError("linear regression needs at least one row");
  if (features.rows() != targets.size()) throw ConfigurationError("features and targets differ in length");
  Matrix design(features.rows(), features.cols() + 1);
  design.leftCols(features.cols()) = features;
  design.col(features.cols()).setOnes();
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
  return LinearModel(cod.solve(targets));
}

PredictorPtr gp_mean_wrapper(TrainedGP gp) { return std::make_shared<const GpMeanPredictor>(std::move(gp)); }

const char* to_string(SurrogateKind kind) {
  switch (kind) {
    case SurrogateKind::Gp: return "gp";
    case SurrogateKind::Knn: return "knn";
    case SurrogateKind::Linear: return "linear";
  }
  return "unknown";
}

SurrogateKind surrogate_kind_from_string(const std::string& name) {
  if (name == "gp") return SurrogateKind::Gp;
  if (name == "knn") return SurrogateKind::Knn;
  if (name == "linear") return SurrogateKind::Linear;
  throw ConfigurationError("unknown surrogate '" + name + "' (expected gp, knn or linear)");
}

PredictorPtr train_surrogate(const SurrogateSpec& spec, const Matrix& features, const Vector& targets,
                             const OptimizerConfig& cfg) {
  switch (spec.kind) {
    case SurrogateKind::Knn: return std::make_shared<const KnnModel>(features, targets, spec.knn_k);
    case SurrogateKind::Linear: return std::make_shared<const LinearModel>(linreg_fit(features, targets));
    case SurrogateKind::Gp:
      return gp_mean_wrapper(train_gp(features, targets, ArdKernel::unit(static_cast<std::size_t>(features.cols())),
                                      spec.gp_mean, cfg));
  }
  throw ConfigurationError("unknown surrogate kind");
}

}  // namespace mfgp
