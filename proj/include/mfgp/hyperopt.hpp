#pragma once

#include "mfgp/gp.hpp"
#include "mfgp/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace mfgp {

struct AdamState {
  Vector first_moment;
  Vector second_moment;
  std::uint64_t step_count = 0;
  double learning_rate = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState zeros(std::size_t n, double learning_rate);
};

/// One bias-corrected ADAM update in the ascent direction (the objective is
/// maximized). Throws NumericalError on a non-finite gradient and
/// ConfigurationError on a length mismatch.
std::pair<Vector, AdamState> adam_step(const AdamState& state, const Vector& gradient, const Vector& params);

struct OptimizerConfig {
  /// Stop a run after this many iterations without a new best objective.
  std::size_t patience = 1000;
  std::size_t max_iterations = 20000;
  std::size_t restarts = 1;
  std::uint64_t seed = 0;
  double learning_rate = 0.05;
  /// Std of the Gaussian perturbation applied to the initial point for restarts 2..n.
  double restart_spread = 0.5;
  /// Keep the best-so-far objective after every iteration of each run.
  bool record_trace = false;

  void validate() const;
};

struct ObjectiveValue {
  double value;
  Vector gradient;
};

/// May throw; a throwing evaluation ends the current run.
using Objective = std::function<ObjectiveValue(const Vector&)>;

struct RunSummary {
  double initial_value;       // NaN when the start point itself failed
  double best_value;          // -inf when nothing evaluated
  std::size_t iterations = 0;
  bool failed = false;        // ended by an exception
  std::string failure;
  std::vector<double> best_trace;
};

struct OptimizationResult {
  Vector best_params;
  double best_value;
  std::vector<RunSummary> runs;
};

/// Runs cfg.restarts seeded ADAM ascents. Restart 0 starts at `initial`;
/// restart r > 0 starts at `initial` plus N(0, restart_spread^2) noise drawn
/// from the seed stream in restart order. Returns the best point ever
/// evaluated, ties resolved by the lowest restart index. Throws
/// OptimizationError when no run produced a finite objective.
OptimizationResult maximize(const Objective& objective, const Vector& initial, const OptimizerConfig& cfg);

/// Starting hyperparameters for a GP fit: unit lengthscales, amplitude equal to
/// the target standard deviation, noise 0.1 x that, and zero mean coefficients.
/// NARGP kernels start with the low-fidelity block at unit amplitude.
GPHyperparams initial_hyperparams(const Kernel& kernel_shape, MeanKind mean, const Vector& targets);

struct MllFit {
  GPHyperparams hyperparams;
  double best_logml;
  OptimizationResult trace;
};

/// Type-II maximum likelihood from `initial`.
MllFit maximize_mll(const Matrix& features, const Vector& targets, const GPHyperparams& initial,
                    const OptimizerConfig& cfg);

/// Trains a GP by maximize_mll from initial_hyperparams and fits it at the optimum.
TrainedGP train_gp(const Matrix& features, const Vector& targets, const Kernel& kernel_shape, MeanKind mean,
                   const OptimizerConfig& cfg);

}  // namespace mfgp
