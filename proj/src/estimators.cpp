#include "mfgp/estimators.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace mfgp {
namespace {

double mean_of(const Vector& v) { return v.size() > 0 ? v.mean() : 0.0; }

OptimizerConfig with_seed(const OptimizerConfig& cfg, std::uint64_t stream) {
  OptimizerConfig out = cfg;
  out.seed = derive_seed(cfg.seed, stream);
  return out;
}

Matrix append_column(const Matrix& left, const Vector& column) {
  Matrix out(left.rows(), left.cols() + 1);
  out.leftCols(left.cols()) = left;
  out.col(left.cols()) = column;
  return out;
}

// Errors raised while training level `level` are re-thrown with the level named.
template <typename F>
auto at_level(std::size_t level, F&& f) {
  try {
    return f();
  } catch (const NumericalError& e) {
    throw NumericalError("level " + std::to_string(level) + ": " + e.what(), e.jitter());
  } catch (const OptimizationError& e) {
    throw OptimizationError("level " + std::to_string(level) + ": " + e.what());
  } catch (const ConfigurationError& e) {
    throw ConfigurationError("level " + std::to_string(level) + ": " + e.what());
  }
}

void require_levels(const MFDataset& data, std::size_t min_levels, const char* name) {
  data.validate();
  if (data.num_levels() < min_levels)
    throw ConfigurationError(std::string(name) + " needs at least " + std::to_string(min_levels) +
                             " fidelity levels, got " + std::to_string(data.num_levels()));
}

}  // namespace

const char* to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Proposed: return "proposed";
    case EstimatorKind::Koh: return "koh";
    case EstimatorKind::Nargp: return "nargp";
    case EstimatorKind::Cokriging: return "cokriging";
    case EstimatorKind::Kriging: return "kriging";
  }
  return "unknown";
}

EstimatorKind estimator_kind_from_string(const std::string& name) {
  if (name == "proposed") return EstimatorKind::Proposed;
  if (name == "koh") return EstimatorKind::Koh;
  if (name == "nargp") return EstimatorKind::Nargp;
  if (name == "cokriging") return EstimatorKind::Cokriging;
  if (name == "kriging") return EstimatorKind::Kriging;
  throw ConfigurationError("unknown estimator '" + name + "'");
}

const SurrogateSpec& EstimatorOptions::surrogate_for_level(std::size_t level, std::size_t num_levels) const {
  static const SurrogateSpec default_spec{};
  if (level < 2 || level > num_levels)
    throw ConfigurationError("no low-fidelity surrogate for level " + std::to_string(level));
  if (surrogates.empty()) return default_spec;
  if (surrogates.size() == 1) return surrogates.front();
  if (surrogates.size() != num_levels - 1)
    throw ConfigurationError("expected 1 or " + std::to_string(num_levels - 1) + " surrogate specs, got " +
                             std::to_string(surrogates.size()));
  return surrogates[level - 2];
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void MFModel::check_queries(const Matrix& queries) const {
  if (static_cast<std::size_t>(queries.cols()) != input_dim())
    throw ConfigurationError("query width " + std::to_string(queries.cols()) + " does not match model input width " +
                             std::to_string(input_dim()));
  if (!queries.allFinite()) throw ConfigurationError("queries contain non-finite values");
}

Vector LevelSurrogate::predict(const Matrix& raw_features) const {
  Vector out = predictor->predict(input.apply(raw_features));
  out.array() += target_offset;
  return out;
}

LevelSurrogate train_level_surrogate(const SurrogateSpec& spec, const Matrix& raw_features, const Vector& targets,
                                     const OptimizerConfig& cfg) {
  LevelSurrogate s;
  s.input = Standardizer::fit(raw_features);
  s.target_offset = mean_of(targets);
  const Vector centered = (targets.array() - s.target_offset).matrix();
  s.predictor = train_surrogate(spec, s.input.apply(raw_features), centered, cfg);
  return s;
}

namespace {

bool same_settings(const OptimizerConfig& a, const OptimizerConfig& b) {
  return a.patience == b.patience && a.max_iterations == b.max_iterations && a.restarts == b.restarts &&
         a.seed == b.seed && a.learning_rate == b.learning_rate && a.restart_spread == b.restart_spread &&
         a.record_trace == b.record_trace;
}

bool same_spec(const SurrogateSpec& a, const SurrogateSpec& b) {
  return a.kind == b.kind && a.knn_k == b.knn_k && a.gp_mean == b.gp_mean;
}

template <typename M>
bool same_data(const M& a, const M& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

}  // namespace

std::optional<LevelSurrogate> SurrogateCache::find(const SurrogateSpec& spec, const Matrix& raw_features,
                                                   const Vector& targets, const OptimizerConfig& cfg) const {
  std::lock_guard lock(mutex_);
  for (const auto& e : entries_)
    if (same_spec(e.spec, spec) && same_settings(e.cfg, cfg) && same_data(e.features, raw_features) &&
        same_data(e.targets, targets)) {
      ++hits_;
      return e.surrogate;
    }
  return std::nullopt;
}

void SurrogateCache::insert(const SurrogateSpec& spec, const Matrix& raw_features, const Vector& targets,
                            const OptimizerConfig& cfg, const LevelSurrogate& surrogate) {
  std::lock_guard lock(mutex_);
  entries_.push_back({spec, cfg, raw_features, targets, surrogate});
}

std::size_t SurrogateCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::size_t SurrogateCache::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

LevelSurrogate train_level_surrogate(const SurrogateSpec& spec, const Matrix& raw_features, const Vector& targets,
                                     const OptimizerConfig& cfg, SurrogateCache* cache) {
  if (!cache) return train_level_surrogate(spec, raw_features, targets, cfg);
  if (auto hit = cache->find(spec, raw_features, targets, cfg)) return *std::move(hit);
  LevelSurrogate s = train_level_surrogate(spec, raw_features, targets, cfg);
  cache->insert(spec, raw_features, targets, cfg, s);
  return s;
}

Matrix build_features(const Matrix& inputs, std::span<const LevelSurrogate> chain) {
  Matrix phi = inputs;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (chain[i].input_dim() != static_cast<std::size_t>(phi.cols()))
      throw ConfigurationError("surrogate " + std::to_string(i) + " in the feature chain expects " +
                               std::to_string(chain[i].input_dim()) + " columns, features have " +
                               std::to_string(phi.cols()));
    phi = append_column(phi, chain[i].predict(phi));
  }
  return phi;
}

// ---------------------------------------------------------------------------

ProposedModel::ProposedModel(std::size_t input_dim, std::vector<LevelSurrogate> lowfi, Standardizer top_input,
                             double target_offset, TrainedGP top)
    : input_dim_(input_dim),
      lowfi_(std::move(lowfi)),
      top_input_(std::move(top_input)),
      target_offset_(target_offset),
      top_(std::move(top)) {}

Matrix ProposedModel::top_features(const Matrix& inputs) const {
  return top_input_.apply(build_features(inputs, lowfi_));
}

PosteriorPrediction ProposedModel::predict(const Matrix& queries) const {
  check_queries(queries);
  auto post = top_.posterior(top_features(queries));
  post.mean.array() += target_offset_;
  return post;
}

ProposedModel train_proposed(const MFDataset& data, const EstimatorOptions& opts) {
  require_levels(data, 1, "the feature-augmented estimator");
  const std::size_t K = data.num_levels();
  const std::size_t d = data.input_dim();

  std::vector<LevelSurrogate> lowfi;
  for (std::size_t l = K; l >= 2; --l) {
    const auto& level = data.level(l);
    lowfi.push_back(at_level(l, [&] {
      const Matrix phi = build_features(level.inputs, lowfi);
      return train_level_surrogate(opts.surrogate_for_level(l, K), phi, level.outputs,
                                   with_seed(opts.optimizer, l), opts.surrogate_cache.get());
    }));
  }

  const auto& top_level = data.level(1);
  return at_level(1, [&] {
    const Matrix phi = build_features(top_level.inputs, lowfi);
    Standardizer top_input = Standardizer::fit(phi);
    const double offset = mean_of(top_level.outputs);
    const Vector yc = (top_level.outputs.array() - offset).matrix();
    const MeanKind mean = K == 1 ? MeanKind::Constant : MeanKind::Linear;
    TrainedGP top = train_gp(top_input.apply(phi), yc, ArdKernel::unit(d + K - 1), mean, with_seed(opts.optimizer, 1));
    return ProposedModel(d, std::move(lowfi), std::move(top_input), offset, std::move(top));
  });
}

// ---------------------------------------------------------------------------

KohModel::KohModel(LevelSurrogate base, std::vector<KohLevel> levels)
    : base_(std::move(base)), levels_(std::move(levels)) {}

namespace {

Vector koh_level_mean(const KohLevel& level, const Matrix& inputs, const Vector& lowfi_mean) {
  Vector out = level.delta.predict_mean(level.input.apply(inputs));
  out += level.rho * (lowfi_mean.array() - level.lowfi_offset).matrix();
  out.array() += level.target_offset;
  return out;
}

}  // namespace

PosteriorPrediction KohModel::predict(const Matrix& queries) const {
  check_queries(queries);
  Vector lowfi = base_.predict(queries);
  for (std::size_t i = 0; i + 1 < levels_.size(); ++i) lowfi = koh_level_mean(levels_[i], queries, lowfi);
  const KohLevel& top = levels_.back();
  auto post = top.delta.posterior(top.input.apply(queries));
  post.mean += top.rho * (lowfi.array() - top.lowfi_offset).matrix();
  post.mean.array() += top.target_offset;
  return post;
}

KohModel train_koh(const MFDataset& data, const EstimatorOptions& opts) {
  require_levels(data, 2, "Kennedy-O'Hagan");
  const std::size_t K = data.num_levels();
  const std::size_t d = data.input_dim();

  const auto& bottom = data.level(K);
  LevelSurrogate base = at_level(K, [&] {
    return train_level_surrogate(opts.surrogate_for_level(K, K), bottom.inputs, bottom.outputs,
                                 with_seed(opts.optimizer, K), opts.surrogate_cache.get());
  });

  std::vector<KohLevel> levels;
  for (std::size_t l = K - 1; l >= 1; --l) {
    const auto& level = data.level(l);
    levels.push_back(at_level(l, [&] {
      // Level-(l+1) surrogate at X_l; inputs need not be nested.
      Vector lowfi = base.predict(level.inputs);
      for (const auto& lower : levels) lowfi = koh_level_mean(lower, level.inputs, lowfi);

      KohLevel out;
      out.input = Standardizer::fit(level.inputs);
      out.target_offset = mean_of(level.outputs);
      out.lowfi_offset = mean_of(lowfi);
      const Matrix Xs = out.input.apply(level.inputs);
      const Vector yc = (level.outputs.array() - out.target_offset).matrix();
      const Vector hc = (lowfi.array() - out.lowfi_offset).matrix();
      const OptimizerConfig cfg = with_seed(opts.optimizer, l);

      if (opts.koh_fix_rho_zero) {
        out.rho = 0.0;
        out.delta = train_gp(Xs, yc, ArdKernel::unit(d), MeanKind::Constant, cfg);
        return out;
      }

      // rho starts at the least-squares slope of y on h.
      const double hh = hc.squaredNorm();
      const double rho0 = hh > 0.0 ? hc.dot(yc) / hh : 0.0;
      const GPHyperparams init = initial_hyperparams(ArdKernel::unit(d), MeanKind::Constant, yc - rho0 * hc);
      const Vector gp0 = to_unconstrained(init).values;
      const Eigen::Index ng = gp0.size();
      Vector x0(ng + 1);
      x0.head(ng) = gp0;
      x0[ng] = rho0;

      const Objective objective = [&](const Vector& v) {
        const double rho = v[ng];
        const TrainedGP gp = fit_gp(Xs, yc - rho * hc, from_unconstrained(init, v.head(ng)));
        ObjectiveValue val{gp.log_marginal_likelihood(), Vector(ng + 1)};
        val.gradient.head(ng) = mll_gradient(gp);
        val.gradient[ng] = hc.dot(gp.weights());
        return val;
      };
      const auto result = maximize(objective, x0, cfg);
      out.rho = result.best_params[ng];
      out.delta = fit_gp(Xs, yc - out.rho * hc, from_unconstrained(init, result.best_params.head(ng)));
      return out;
    }));
  }
  return KohModel(std::move(base), std::move(levels));
}

// ---------------------------------------------------------------------------

NargpModel::NargpModel(LevelSurrogate base, std::vector<NargpLevel> levels)
    : base_(std::move(base)), levels_(std::move(levels)) {}

namespace {

Vector nargp_level_mean(const NargpLevel& level, const Matrix& inputs, const Vector& lowfi_mean) {
  Vector out = level.gp.predict_mean(level.input.apply(append_column(inputs, lowfi_mean)));
  out.array() += level.target_offset;
  return out;
}

}  // namespace

PosteriorPrediction NargpModel::predict(const Matrix& queries) const {
  check_queries(queries);
  Vector lowfi = base_.predict(queries);
  for (std::size_t i = 0; i + 1 < levels_.size(); ++i) lowfi = nargp_level_mean(levels_[i], queries, lowfi);
  const NargpLevel& top = levels_.back();
  auto post = top.gp.posterior(top.input.apply(append_column(queries, lowfi)));
  post.mean.array() += top.target_offset;
  return post;
}

NargpModel train_nargp(const MFDataset& data, const EstimatorOptions& opts) {
  require_levels(data, 2, "NARGP");
  const std::size_t K = data.num_levels();
  const std::size_t d = data.input_dim();

  const auto& bottom = data.level(K);
  LevelSurrogate base = at_level(K, [&] {
    return train_level_surrogate(opts.surrogate_for_level(K, K), bottom.inputs, bottom.outputs,
                                 with_seed(opts.optimizer, K), opts.surrogate_cache.get());
  });

  std::vector<NargpLevel> levels;
  for (std::size_t l = K - 1; l >= 1; --l) {
    const auto& level = data.level(l);
    levels.push_back(at_level(l, [&] {
      Vector lowfi = base.predict(level.inputs);
      for (const auto& lower : levels) lowfi = nargp_level_mean(lower, level.inputs, lowfi);
      const Matrix Z = append_column(level.inputs, lowfi);

      NargpLevel out;
      out.input = Standardizer::fit(Z);
      out.target_offset = mean_of(level.outputs);
      const Vector yc = (level.outputs.array() - out.target_offset).matrix();
      out.gp = train_gp(out.input.apply(Z), yc, NargpKernel::unit(d), MeanKind::Zero, with_seed(opts.optimizer, l));
      return out;
    }));
  }
  return NargpModel(std::move(base), std::move(levels));
}

// ---------------------------------------------------------------------------

KrigingModel::KrigingModel(Standardizer input, double target_offset, TrainedGP gp)
    : input_(std::move(input)), target_offset_(target_offset), gp_(std::move(gp)) {}

PosteriorPrediction KrigingModel::predict(const Matrix& queries) const {
  check_queries(queries);
  auto post = gp_.posterior(input_.apply(queries));
  post.mean.array() += target_offset_;
  return post;
}

KrigingModel train_kriging(const DataSet& data, const OptimizerConfig& cfg) {
  data.validate();
  Standardizer input = Standardizer::fit(data.inputs);
  const double offset = mean_of(data.outputs);
  const Vector yc = (data.outputs.array() - offset).matrix();
  TrainedGP gp = at_level(1, [&] {
    return train_gp(input.apply(data.inputs), yc, ArdKernel::unit(data.input_dim()), MeanKind::Constant,
                    with_seed(cfg, 1));
  });
  return KrigingModel(std::move(input), offset, std::move(gp));
}

}  // namespace mfgp
