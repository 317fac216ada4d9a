#include "mfgp/hyperopt.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <string>

namespace mfgp {

AdamState AdamState::zeros(std::size_t n, double learning_rate) {
  AdamState s;
  s.first_moment = Vector::Zero(static_cast<Eigen::Index>(n));
  s.second_moment = Vector::Zero(static_cast<Eigen::Index>(n));
  s.learning_rate = learning_rate;
  return s;
}

std::pair<Vector, AdamState> adam_step(const AdamState& state, const Vector& gradient, const Vector& params) {
  if (gradient.size() != params.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size())
    throw ConfigurationError("ADAM state, gradient and parameters differ in length");
  if (!gradient.allFinite()) throw NumericalError("non-finite gradient passed to ADAM");

  AdamState next = state;
  next.step_count += 1;
  next.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * gradient;
  next.second_moment = state.beta2 * state.second_moment + (1.0 - state.beta2) * gradient.cwiseAbs2();
  const double t = static_cast<double>(next.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  const Vector m_hat = next.first_moment / c1;
  const Vector v_hat = next.second_moment / c2;
  Vector out = params + (state.learning_rate * m_hat.array() / (v_hat.array().sqrt() + state.epsilon)).matrix();
  return {std::move(out), std::move(next)};
}

void OptimizerConfig::validate() const {
  if (patience < 1) throw ConfigurationError("patience must be positive");
  if (max_iterations < 1) throw ConfigurationError("max_iterations must be positive");
  if (patience > max_iterations) throw ConfigurationError("patience must not exceed max_iterations");
  if (restarts < 1) throw ConfigurationError("restarts must be positive");
  if (!(learning_rate > 0.0)) throw ConfigurationError("learning_rate must be positive");
  if (!(restart_spread >= 0.0)) throw ConfigurationError("restart_spread must be nonnegative");
}

namespace {

struct RunOutcome {
  RunSummary summary;
  Vector best_params;
};

RunOutcome run_adam(const Objective& objective, const Vector& start, const OptimizerConfig& cfg) {
  RunOutcome out;
  auto& s = out.summary;
  s.initial_value = std::numeric_limits<double>::quiet_NaN();
  s.best_value = -std::numeric_limits<double>::infinity();

  Vector x = start;
  ObjectiveValue current;
  try {
    current = objective(x);
  } catch (const std::exception& e) {
    s.failed = true;
    s.failure = e.what();
    return out;
  }
  if (!std::isfinite(current.value) || !current.gradient.allFinite()) {
    s.failed = true;
    s.failure = "non-finite objective at the start point";
    return out;
  }
  s.initial_value = current.value;
  s.best_value = current.value;
  out.best_params = x;

  AdamState state = AdamState::zeros(static_cast<std::size_t>(x.size()), cfg.learning_rate);
  std::size_t since_best = 0;
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    try {
      auto [next, next_state] = adam_step(state, current.gradient, x);
      x = std::move(next);
      state = std::move(next_state);
      current = objective(x);
      if (!std::isfinite(current.value) || !current.gradient.allFinite())
        throw NumericalError("non-finite objective");
    } catch (const std::exception& e) {
      s.failed = true;
      s.failure = e.what();
      break;
    }
    s.iterations = it + 1;
    if (current.value > s.best_value) {
      s.best_value = current.value;
      out.best_params = x;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (cfg.record_trace) s.best_trace.push_back(s.best_value);
    if (since_best >= cfg.patience) break;
  }
  return out;
}

}  // namespace

OptimizationResult maximize(const Objective& objective, const Vector& initial, const OptimizerConfig& cfg) {
  cfg.validate();
  const std::size_t runs = cfg.restarts;

  // Start points are drawn serially so they do not depend on scheduling.
  std::vector<Vector> starts(runs, initial);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, cfg.restart_spread);
  for (std::size_t r = 1; r < runs; ++r)
    for (Eigen::Index i = 0; i < initial.size(); ++i) starts[r][i] += noise(rng);

  std::vector<RunOutcome> outcomes(runs);
#pragma omp parallel for schedule(dynamic, 1) if (runs > 1)
  for (std::size_t r = 0; r < runs; ++r) outcomes[r] = run_adam(objective, starts[r], cfg);

  OptimizationResult result;
  result.best_value = -std::numeric_limits<double>::infinity();
  std::string failures;
  for (std::size_t r = 0; r < runs; ++r) {
    const auto& o = outcomes[r];
    if (o.summary.best_value > result.best_value) {
      result.best_value = o.summary.best_value;
      result.best_params = o.best_params;
    }
    if (o.summary.failed) failures += " [restart " + std::to_string(r) + ": " + o.summary.failure + "]";
    result.runs.push_back(o.summary);
  }
  if (!std::isfinite(result.best_value))
    throw OptimizationError("every restart failed to evaluate the objective:" + failures);
  return result;
}

GPHyperparams initial_hyperparams(const Kernel& kernel_shape, MeanKind mean, const Vector& targets) {
  double sd = 0.0;
  if (targets.size() > 1) {
    const double mu = targets.mean();
    sd = std::sqrt((targets.array() - mu).square().sum() / static_cast<double>(targets.size() - 1));
  }
  if (!(sd > 0.0) || !std::isfinite(sd)) sd = 1.0;

  GPHyperparams hp;
  const std::size_t m = kernel_input_dim(kernel_shape);
  if (const auto* nargp = std::get_if<NargpKernel>(&kernel_shape)) {
    const std::size_t d = nargp->input_scale.input_dim();
    NargpKernel k = NargpKernel::unit(d);
    k.input_scale.amplitude = sd;
    k.discrepancy.amplitude = sd;
    hp.kernel = k;
  } else {
    ArdKernel k = ArdKernel::unit(m);
    k.amplitude = sd;
    hp.kernel = k;
  }
  hp.noise_std = 0.1 * sd;
  hp.mean = MeanFunction::zeros(mean, m);
  return hp;
}

MllFit maximize_mll(const Matrix& features, const Vector& targets, const GPHyperparams& initial,
                    const OptimizerConfig& cfg) {
  if (features.rows() < 1) throw ConfigurationError("cannot optimize a GP on an empty dataset");
  initial.validate(static_cast<std::size_t>(features.cols()));
  const Objective objective = [&](const Vector& v) {
    const auto eval = mll_value_and_gradient(features, targets, initial, v);
    return ObjectiveValue{eval.log_ml, eval.gradient};
  };
  auto result = maximize(objective, to_unconstrained(initial).values, cfg);
  MllFit fit{from_unconstrained(initial, result.best_params), result.best_value, std::move(result)};
  return fit;
}

TrainedGP train_gp(const Matrix& features, const Vector& targets, const Kernel& kernel_shape, MeanKind mean,
                   const OptimizerConfig& cfg) {
  const auto init = initial_hyperparams(kernel_shape, mean, targets);
  const auto fit = maximize_mll(features, targets, init, cfg);
  return fit_gp(features, targets, fit.hyperparams);
}

}  // namespace mfgp
