#include "mfgp/cokriging.hpp"

#include "mfgp/gram.hpp"
#include "mfgp/hyperopt.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace mfgp {
namespace {

struct Stacked {
  Matrix points;
  std::vector<Eigen::Index> offsets;  // size K + 1
};

Stacked stack_levels(const std::vector<Matrix>& inputs) {
  Stacked s;
  s.offsets.push_back(0);
  for (const auto& X : inputs) s.offsets.push_back(s.offsets.back() + X.rows());
  const Eigen::Index d = inputs.empty() ? 0 : inputs.front().cols();
  s.points.resize(s.offsets.back(), d);
  for (std::size_t l = 0; l < inputs.size(); ++l) {
    if (inputs[l].cols() != d) throw ConfigurationError("cokriging levels differ in input width");
    s.points.middleRows(s.offsets[l], inputs[l].rows()) = inputs[l];
  }
  return s;
}

ArdKernel shared_kernel(const CokrigingHyperparams& hp, std::size_t r) { return {1.0, hp.lengthscales[r]}; }

// Expands a K x K level matrix to the stacked point layout.
Matrix expand_levels(const Matrix& levels, const std::vector<Eigen::Index>& offsets) {
  const Eigen::Index n = offsets.back();
  Matrix out(n, n);
  const std::size_t K = offsets.size() - 1;
  for (std::size_t j = 0; j < K; ++j)
    for (std::size_t i = 0; i < K; ++i)
      out.block(offsets[i], offsets[j], offsets[i + 1] - offsets[i], offsets[j + 1] - offsets[j])
          .setConstant(levels(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  return out;
}

Matrix assemble(const Stacked& s, const CokrigingHyperparams& hp, bool include_noise, std::vector<Matrix>* shared) {
  const Eigen::Index n = s.offsets.back();
  Matrix C = Matrix::Zero(n, n);
  for (std::size_t r = 0; r < hp.rank(); ++r) {
    Matrix Kr = kernel_matrix(s.points, shared_kernel(hp, r));
    C.array() += expand_levels(hp.coefficient_matrix(r), s.offsets).array() * Kr.array();
    if (shared) shared->push_back(std::move(Kr));
  }
  if (include_noise)
    for (std::size_t l = 0; l + 1 < s.offsets.size(); ++l)
      C.diagonal().segment(s.offsets[l], s.offsets[l + 1] - s.offsets[l]).array() +=
          hp.noise_std[static_cast<Eigen::Index>(l)] * hp.noise_std[static_cast<Eigen::Index>(l)];
  return C;
}

Vector centered_targets(const std::vector<Vector>& targets, const CokrigingHyperparams& hp,
                        const std::vector<Eigen::Index>& offsets) {
  Vector y(offsets.back());
  for (std::size_t l = 0; l < targets.size(); ++l)
    y.segment(offsets[l], targets[l].size()) = targets[l].array() - hp.means[static_cast<Eigen::Index>(l)];
  return y;
}

void check_data(const std::vector<Matrix>& inputs, const std::vector<Vector>& targets, const CokrigingHyperparams& hp) {
  hp.validate();
  if (inputs.size() != hp.num_levels() || targets.size() != hp.num_levels())
    throw ConfigurationError("cokriging data has " + std::to_string(inputs.size()) + " levels, parameters have " +
                             std::to_string(hp.num_levels()));
  for (std::size_t l = 0; l < inputs.size(); ++l) {
    if (inputs[l].rows() != targets[l].size())
      throw ConfigurationError("cokriging level " + std::to_string(l + 1) + " has mismatched inputs and targets");
    if (static_cast<std::size_t>(inputs[l].cols()) != hp.input_dim())
      throw ConfigurationError("cokriging level " + std::to_string(l + 1) + " has the wrong input width");
  }
}

struct JointFactor {
  Stacked stacked;
  std::vector<Matrix> shared;
  Matrix chol;
  double jitter;
  double scale;
  Vector weights;
  double log_ml;
};

JointFactor factor(const std::vector<Matrix>& inputs, const std::vector<Vector>& targets,
                   const CokrigingHyperparams& hp) {
  check_data(inputs, targets, hp);
  JointFactor f;
  f.stacked = stack_levels(inputs);
  Matrix C = assemble(f.stacked, hp, false, &f.shared);
  const double scale = C.diagonal().mean();
  for (std::size_t l = 0; l < hp.num_levels(); ++l)
    C.diagonal().segment(f.stacked.offsets[l], f.stacked.offsets[l + 1] - f.stacked.offsets[l]).array() +=
        hp.noise_std[static_cast<Eigen::Index>(l)] * hp.noise_std[static_cast<Eigen::Index>(l)];
  auto chol = cholesky_with_jitter(C, scale);
  f.chol = std::move(chol.lower);
  f.jitter = chol.jitter;
  f.scale = scale;
  const Vector y = centered_targets(targets, hp, f.stacked.offsets);
  f.weights = f.chol.triangularView<Eigen::Lower>().solve(y);
  f.chol.transpose().triangularView<Eigen::Upper>().solveInPlace(f.weights);
  const double n = static_cast<double>(y.size());
  f.log_ml = -0.5 * (y.dot(f.weights) + 2.0 * f.chol.diagonal().array().log().sum() +
                     n * std::log(2.0 * std::numbers::pi));
  return f;
}

}  // namespace

Matrix CokrigingHyperparams::coefficient_matrix(std::size_t r) const {
  const auto rr = static_cast<Eigen::Index>(r);
  Matrix B = loadings.col(rr) * loadings.col(rr).transpose();
  B.diagonal() += diagonals.col(rr);
  return B;
}

void CokrigingHyperparams::validate() const {
  const auto K = static_cast<Eigen::Index>(num_levels());
  const auto R = static_cast<Eigen::Index>(rank());
  if (K < 1) throw ConfigurationError("cokriging needs at least one level");
  if (R < 1) throw ConfigurationError("cokriging needs rank >= 1");
  for (const auto& l : lengthscales)
    if (l.size() != lengthscales[0].size() || l.size() < 1 || !(l.array() > 0.0).all() || !l.allFinite())
      throw ConfigurationError("cokriging lengthscales must be positive, finite and of equal width");
  if (loadings.rows() != K || loadings.cols() != R || diagonals.rows() != K || diagonals.cols() != R)
    throw ConfigurationError("cokriging coefficient factors must be K x R");
  if (!loadings.allFinite() || !diagonals.allFinite() || (diagonals.array() < 0.0).any())
    throw ConfigurationError("cokriging coefficient factors must be finite with nonnegative diagonals");
  if (means.size() != K || !means.allFinite()) throw ConfigurationError("cokriging needs one finite mean per level");
  if (!noise_std.allFinite() || (noise_std.array() < 0.0).any())
    throw ConfigurationError("cokriging noise must be finite and nonnegative");
}

std::size_t cokriging_unconstrained_size(std::size_t num_levels, std::size_t rank, std::size_t input_dim) {
  return rank * (input_dim + 2 * num_levels) + 2 * num_levels;
}

Vector cokriging_to_unconstrained(const CokrigingHyperparams& hp) {
  hp.validate();
  const auto K = static_cast<Eigen::Index>(hp.num_levels());
  const auto d = static_cast<Eigen::Index>(hp.input_dim());
  Vector v(static_cast<Eigen::Index>(cokriging_unconstrained_size(hp.num_levels(), hp.rank(), hp.input_dim())));
  Eigen::Index at = 0;
  for (std::size_t r = 0; r < hp.rank(); ++r) {
    const auto rr = static_cast<Eigen::Index>(r);
    v.segment(at, d) = hp.lengthscales[r].array().log();
    at += d;
    v.segment(at, K) = hp.loadings.col(rr);
    at += K;
    v.segment(at, K) = hp.diagonals.col(rr).array().log();
    at += K;
  }
  v.segment(at, K) = hp.noise_std.array().max(kNoiseFloor).log();
  at += K;
  v.segment(at, K) = hp.means;
  return v;
}

CokrigingHyperparams cokriging_from_unconstrained(std::size_t num_levels, std::size_t rank, std::size_t input_dim,
                                                  const Vector& values) {
  if (static_cast<std::size_t>(values.size()) != cokriging_unconstrained_size(num_levels, rank, input_dim))
    throw ConfigurationError("cokriging parameter vector has the wrong length");
  const auto K = static_cast<Eigen::Index>(num_levels);
  const auto d = static_cast<Eigen::Index>(input_dim);
  CokrigingHyperparams hp;
  hp.loadings.resize(K, static_cast<Eigen::Index>(rank));
  hp.diagonals.resize(K, static_cast<Eigen::Index>(rank));
  Eigen::Index at = 0;
  for (std::size_t r = 0; r < rank; ++r) {
    const auto rr = static_cast<Eigen::Index>(r);
    hp.lengthscales.emplace_back(values.segment(at, d).array().exp());
    at += d;
    hp.loadings.col(rr) = values.segment(at, K);
    at += K;
    hp.diagonals.col(rr) = values.segment(at, K).array().exp();
    at += K;
  }
  hp.noise_std = values.segment(at, K).array().exp().max(kNoiseFloor);
  at += K;
  hp.means = values.segment(at, K);
  return hp;
}

Matrix cokriging_gram(const std::vector<Matrix>& inputs, const CokrigingHyperparams& hp, bool include_noise) {
  hp.validate();
  return assemble(stack_levels(inputs), hp, include_noise, nullptr);
}

Matrix serial::cokriging_gram(const std::vector<Matrix>& inputs, const CokrigingHyperparams& hp, bool include_noise) {
  hp.validate();
  Eigen::Index n = 0;
  for (const auto& X : inputs) n += X.rows();
  Matrix C(n, n);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Eigen::Index col = 0;
    for (std::size_t j = 0; j < inputs.size(); ++j) {
      Matrix block = Matrix::Zero(inputs[i].rows(), inputs[j].rows());
      for (std::size_t r = 0; r < hp.rank(); ++r)
        block += hp.coefficient_matrix(r)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
                 serial::kernel_matrix(inputs[i], inputs[j], shared_kernel(hp, r));
      if (include_noise && i == j)
        block.diagonal().array() += hp.noise_std[static_cast<Eigen::Index>(i)] * hp.noise_std[static_cast<Eigen::Index>(i)];
      C.block(row, col, block.rows(), block.cols()) = block;
      col += inputs[j].rows();
    }
    row += inputs[i].rows();
  }
  return C;
}

double cokriging_log_ml(const std::vector<Matrix>& inputs, const std::vector<Vector>& targets,
                        const CokrigingHyperparams& hp) {
  return factor(inputs, targets, hp).log_ml;
}

CokrigingEvaluation cokriging_value_and_gradient(const std::vector<Matrix>& inputs, const std::vector<Vector>& targets,
                                                 const CokrigingHyperparams& hp) {
  const JointFactor f = factor(inputs, targets, hp);
  const auto& offsets = f.stacked.offsets;
  const Eigen::Index n = offsets.back();
  const auto K = static_cast<Eigen::Index>(hp.num_levels());
  const auto d = static_cast<Eigen::Index>(hp.input_dim());

  Matrix W = -inverse_from_cholesky(f.chol);
  W.noalias() += f.weights * f.weights.transpose();

  // The jitter is proportional to mean(diag K) = sum_k n_k sum_r B^(r)_kk / n,
  // which adds tr(W) * jitter/scale * n_k/n to the diagonal of each M below.
  Vector jitter_diag = Vector::Zero(K);
  if (f.scale > 0.0 && std::isfinite(f.scale))
    for (Eigen::Index k = 0; k < K; ++k)
      jitter_diag[k] = W.trace() * f.jitter / f.scale *
                       static_cast<double>(offsets[static_cast<std::size_t>(k) + 1] - offsets[static_cast<std::size_t>(k)]) /
                       static_cast<double>(n);

  CokrigingEvaluation out{f.log_ml,
                          Vector(static_cast<Eigen::Index>(cokriging_unconstrained_size(hp.num_levels(), hp.rank(), hp.input_dim())))};
  Eigen::Index at = 0;
  for (std::size_t r = 0; r < hp.rank(); ++r) {
    const auto rr = static_cast<Eigen::Index>(r);
    const Matrix B = hp.coefficient_matrix(r);
    const Matrix WB = (W.array() * expand_levels(B, offsets).array()).matrix();
    const Vector g = contract_kernel_gradient(f.stacked.points, shared_kernel(hp, r), WB);
    out.gradient.segment(at, d) = 0.5 * g.tail(d);
    at += d;

    // M_ij = sum over block (i, j) of W * K^(r)
    const Matrix WK = (W.array() * f.shared[r].array()).matrix();
    Matrix M(K, K);
    for (Eigen::Index j = 0; j < K; ++j)
      for (Eigen::Index i = 0; i < K; ++i)
        M(i, j) = WK.block(offsets[static_cast<std::size_t>(i)], offsets[static_cast<std::size_t>(j)],
                           offsets[static_cast<std::size_t>(i) + 1] - offsets[static_cast<std::size_t>(i)],
                           offsets[static_cast<std::size_t>(j) + 1] - offsets[static_cast<std::size_t>(j)])
                      .sum();
    M.diagonal() += jitter_diag;
    out.gradient.segment(at, K) = M * hp.loadings.col(rr);
    at += K;
    out.gradient.segment(at, K) = 0.5 * M.diagonal().array() * hp.diagonals.col(rr).array();
    at += K;
  }
  for (Eigen::Index l = 0; l < K; ++l) {
    const auto lo = offsets[static_cast<std::size_t>(l)];
    const auto len = offsets[static_cast<std::size_t>(l) + 1] - lo;
    const double s = hp.noise_std[l];
    out.gradient[at + l] = s > kNoiseFloor ? s * s * W.diagonal().segment(lo, len).sum() : 0.0;
    out.gradient[at + K + l] = f.weights.segment(lo, len).sum();
  }
  if (!out.gradient.allFinite()) throw NumericalError("non-finite cokriging gradient", f.jitter);
  return out;
}

CokrigingModel::CokrigingModel(Standardizer input, std::vector<Matrix> features, std::vector<Vector> targets,
                               CokrigingHyperparams hp)
    : input_(std::move(input)), features_(std::move(features)), targets_(std::move(targets)), hp_(std::move(hp)) {
  JointFactor f = factor(features_, targets_, hp_);
  chol_ = std::move(f.chol);
  weights_ = std::move(f.weights);
  log_ml_ = f.log_ml;
}

PosteriorPrediction CokrigingModel::predict(const Matrix& queries) const {
  check_queries(queries);
  const Matrix Xq = input_.apply(queries);
  const Stacked s = stack_levels(features_);
  Matrix Kq = Matrix::Zero(Xq.rows(), s.offsets.back());
  double prior = 0.0;
  for (std::size_t r = 0; r < hp_.rank(); ++r) {
    const Matrix B = hp_.coefficient_matrix(r);
    const Matrix Kr = kernel_matrix(Xq, s.points, shared_kernel(hp_, r));
    for (std::size_t l = 0; l < features_.size(); ++l) {
      const auto lo = s.offsets[l];
      const auto len = s.offsets[l + 1] - lo;
      Kq.middleCols(lo, len) += B(0, static_cast<Eigen::Index>(l)) * Kr.middleCols(lo, len);
    }
    prior += B(0, 0);
  }
  PosteriorPrediction out;
  out.mean = Kq * weights_;
  out.mean.array() += hp_.means[0];
  Matrix V = Kq.transpose();
  chol_.triangularView<Eigen::Lower>().solveInPlace(V);
  out.variance = (prior - V.colwise().squaredNorm().transpose().array()).max(0.0);
  return out;
}

CokrigingModel train_cokriging(const MFDataset& data, const EstimatorOptions& opts) {
  data.validate();
  const std::size_t K = data.num_levels();
  const std::size_t R = opts.cokriging_rank;
  const std::size_t d = data.input_dim();
  if (R < 1) throw ConfigurationError("cokriging rank must be at least 1");
  std::size_t total = 0;
  for (const auto& level : data.levels) total += level.size();
  if (total > opts.cokriging_max_points)
    throw CapacityError("cokriging joint solve over " + std::to_string(total) + " points exceeds the limit of " +
                        std::to_string(opts.cokriging_max_points));

  Matrix pooled(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(d));
  Eigen::Index row = 0;
  for (const auto& level : data.levels) {
    pooled.middleRows(row, level.inputs.rows()) = level.inputs;
    row += level.inputs.rows();
  }
  Standardizer input = Standardizer::fit(pooled);
  std::vector<Matrix> features;
  std::vector<Vector> targets;
  for (const auto& level : data.levels) {
    features.push_back(input.apply(level.inputs));
    targets.push_back(level.outputs);
  }

  // Distinct starting lengthscales keep the shared kernels from collapsing
  // onto one another.
  CokrigingHyperparams init;
  const auto Ki = static_cast<Eigen::Index>(K);
  const auto Ri = static_cast<Eigen::Index>(R);
  init.loadings.resize(Ki, Ri);
  init.diagonals.resize(Ki, Ri);
  init.noise_std.resize(Ki);
  init.means.resize(Ki);
  for (std::size_t l = 0; l < K; ++l) {
    const Vector& y = targets[l];
    const double mean = y.mean();
    double sd = y.size() > 1 ? std::sqrt((y.array() - mean).square().sum() / static_cast<double>(y.size() - 1)) : 0.0;
    if (!(sd > 0.0) || !std::isfinite(sd)) sd = 1.0;
    const auto li = static_cast<Eigen::Index>(l);
    init.loadings.row(li).setConstant(sd / std::sqrt(static_cast<double>(R)));
    init.diagonals.row(li).setConstant(0.1 * sd * sd / static_cast<double>(R));
    init.noise_std[li] = 0.1 * sd;
    init.means[li] = mean;
  }
  for (std::size_t r = 0; r < R; ++r)
    init.lengthscales.push_back(Vector::Constant(static_cast<Eigen::Index>(d), std::ldexp(1.0, -static_cast<int>(r))));

  OptimizerConfig cfg = opts.optimizer;
  cfg.seed = derive_seed(cfg.seed, 1);
  const Objective objective = [&](const Vector& v) {
    const auto eval = cokriging_value_and_gradient(features, targets, cokriging_from_unconstrained(K, R, d, v));
    return ObjectiveValue{eval.log_ml, eval.gradient};
  };
  const auto result = maximize(objective, cokriging_to_unconstrained(init), cfg);
  return CokrigingModel(std::move(input), std::move(features), std::move(targets),
                        cokriging_from_unconstrained(K, R, d, result.best_params));
}

}  // namespace mfgp
