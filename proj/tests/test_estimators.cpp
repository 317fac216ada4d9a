#include "doctest.h"
#include "test_support.hpp"

#include "mfgp/analytic.hpp"
#include "mfgp/estimators.hpp"
#include "mfgp/metrics.hpp"

#include <cmath>
#include <numbers>

using namespace mfgp;
using namespace mfgp::testing;

namespace {

class ConstantPredictor final : public PointPredictor {
 public:
  ConstantPredictor(std::size_t dim, double value) : dim_(dim), value_(value) {}
  std::string_view kind() const override { return "constant"; }
  std::size_t input_dim() const override { return dim_; }
  Vector predict(const Matrix& q) const override { return Vector::Constant(q.rows(), value_); }

 private:
  std::size_t dim_;
  double value_;
};

class SumPredictor final : public PointPredictor {
 public:
  explicit SumPredictor(std::size_t dim) : dim_(dim) {}
  std::string_view kind() const override { return "sum"; }
  std::size_t input_dim() const override { return dim_; }
  Vector predict(const Matrix& q) const override { return q.rowwise().sum(); }

 private:
  std::size_t dim_;
};

LevelSurrogate wrap(PredictorPtr p, std::size_t dim) { return {Standardizer::identity(dim), 0.0, std::move(p)}; }

DataSet sample(double (*f)(double), const Vector& x) {
  DataSet d{x, Vector(x.size())};
  for (Eigen::Index i = 0; i < x.size(); ++i) d.outputs[i] = f(x[i]);
  return d;
}

double sin2pi(double x) { return std::sin(2.0 * std::numbers::pi * x); }
double sin2pi_sq(double x) { return sin2pi(x) * sin2pi(x); }
double twice_sin2pi(double x) { return 2.0 * sin2pi(x); }

OptimizerConfig quick_cfg() {
  OptimizerConfig cfg;
  cfg.patience = 100;
  cfg.max_iterations = 600;
  return cfg;
}

}  // namespace

TEST_CASE("Feature recursion widths and constant surrogates") {
  const std::vector<LevelSurrogate> chain{wrap(std::make_shared<ConstantPredictor>(2, 3.0), 2),
                                          wrap(std::make_shared<ConstantPredictor>(3, -2.0), 3)};
  Matrix X(2, 2);
  X << 0.1, 0.2, 0.3, 0.4;
  const Matrix phi = build_features(X, chain);
  CHECK(phi.cols() == 4);
  CHECK(phi.leftCols(2) == X);
  CHECK(phi.col(2) == Vector::Constant(2, 3.0));
  CHECK(phi.col(3) == Vector::Constant(2, -2.0));
  CHECK(build_features(X, {}) == X);
}

TEST_CASE("Feature recursion matches a manual two-step evaluation") {
  std::mt19937_64 rng(12);
  const Matrix X = uniform_matrix(rng, 6, 2);
  const std::vector<LevelSurrogate> chain{wrap(std::make_shared<SumPredictor>(2), 2),
                                          wrap(std::make_shared<SumPredictor>(3), 3)};
  const Matrix phi = build_features(X, chain);
  const Vector h3 = X.rowwise().sum();
  Matrix step(6, 3);
  step << X, h3;
  const Vector h2 = step.rowwise().sum();
  CHECK(phi.col(2) == h3);
  CHECK(phi.col(3) == h2);
}

TEST_CASE("Feature recursion rejects width mismatches") {
  const std::vector<LevelSurrogate> chain{wrap(std::make_shared<ConstantPredictor>(3, 1.0), 3)};
  CHECK_THROWS_AS(build_features(Matrix::Zero(2, 2), chain), ConfigurationError);
}

TEST_CASE("Proposed estimator with one level is the kriging baseline") {
  const DataSet d = sample(sin2pi, linspace(0.0, 1.0, 8));
  EstimatorOptions opts;
  opts.optimizer = quick_cfg();
  opts.optimizer.seed = 5;
  const auto prop = train_proposed(MFDataset{{d}}, opts);
  const auto krig = train_kriging(d, opts.optimizer);
  CHECK(std::abs(prop.log_ml() - krig.log_ml()) <= 1e-10);
  const Matrix q = linspace(-0.2, 1.2, 17);
  CHECK(prop.predict(q).mean == krig.predict(q).mean);
  CHECK(prop.predict(q).variance == krig.predict(q).variance);
}

TEST_CASE("Proposed estimator on the three-level analytic setup") {
  const auto problem = gen_analytic(0);
  EstimatorOptions opts;
  opts.optimizer = quick_cfg();
  const auto model = train_proposed(problem.train, opts);
  CHECK(model.top().feature_dim() == 3);
  CHECK(model.lowfi().size() == 2);
  CHECK(model.lowfi()[0].input_dim() == 1);
  CHECK(model.lowfi()[1].input_dim() == 2);
  CHECK(model.top().hyperparams().mean.kind == MeanKind::Linear);

  const Matrix& X1 = problem.train.level(1).inputs;
  CHECK(model.top_features(X1) == model.top().features());

  const Matrix q = problem.test.inputs.topRows(25);
  const auto batch = model.predict(q);
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    const auto one = model.predict(q.row(i));
    CHECK(one.mean[0] == batch.mean[i]);
    CHECK(one.variance[0] == batch.variance[i]);
  }
  CHECK_THROWS_AS(model.predict(Matrix::Zero(2, 2)), ConfigurationError);
}

TEST_CASE("Proposed estimator interpolates level-1 data through fixed features") {
  const auto problem = gen_analytic(1);
  EstimatorOptions opts;
  opts.optimizer = quick_cfg();
  const auto trained = train_proposed(problem.train, opts);
  auto hp = trained.top().hyperparams();
  hp.noise_std = 0.0;
  const ProposedModel noiseless(1, trained.lowfi(), trained.top_input(), trained.target_offset(),
                                fit_gp(trained.top().features(), trained.top().targets(), hp));
  const auto& level1 = problem.train.level(1);
  const auto post = noiseless.predict(level1.inputs);
  CHECK((post.mean - level1.outputs).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("Proposed estimator with perfect low-fidelity information") {
  const Vector x2 = linspace(0.0, 1.0, 50);
  Vector x1(5);
  for (Eigen::Index i = 0; i < 5; ++i) x1[i] = x2[i * 12];
  const MFDataset mf{{sample(sin2pi, x1), sample(sin2pi, x2)}};
  const auto model = train_proposed(mf, EstimatorOptions{});
  const DataSet test = sample(sin2pi, linspace(0.0, 1.0, 200));
  CHECK(rmse(model.predict(test.inputs).mean, test.outputs) <= 1e-3);
}

TEST_CASE("KOH recovers a linear scale between levels") {
  Vector x1(10);
  std::mt19937_64 rng(3);
  x1 = uniform_vector(rng, 10, 0.0, 1.0);
  const MFDataset mf{{sample(twice_sin2pi, x1), sample(sin2pi, linspace(0.0, 1.0, 100))}};
  const auto model = train_koh(mf, EstimatorOptions{});
  CHECK(model.levels().size() == 1);
  CHECK(model.levels()[0].rho >= 1.95);
  CHECK(model.levels()[0].rho <= 2.05);
  const DataSet test = sample(twice_sin2pi, linspace(0.0, 1.0, 200));
  CHECK(rmse(model.predict(test.inputs).mean, test.outputs) <= 1e-2);
}

TEST_CASE("KOH with the scale pinned at zero is independent kriging") {
  const MFDataset mf{{sample(twice_sin2pi, linspace(0.0, 1.0, 9)), sample(sin2pi, linspace(0.0, 1.0, 30))}};
  EstimatorOptions opts;
  opts.optimizer = quick_cfg();
  opts.koh_fix_rho_zero = true;
  const auto koh = train_koh(mf, opts);
  const auto krig = train_kriging(mf.level(1), opts.optimizer);
  CHECK(koh.levels()[0].rho == 0.0);
  CHECK(koh.log_ml() == krig.log_ml());
  const Matrix q = linspace(0.0, 1.0, 33);
  CHECK(koh.predict(q).mean == krig.predict(q).mean);
  CHECK(koh.predict(q).variance == krig.predict(q).variance);
}

TEST_CASE("KOH and NARGP need at least two levels") {
  const MFDataset one{{sample(sin2pi, linspace(0.0, 1.0, 5))}};
  CHECK_THROWS_AS(train_koh(one, EstimatorOptions{}), ConfigurationError);
  CHECK_THROWS_AS(train_nargp(one, EstimatorOptions{}), ConfigurationError);
}

TEST_CASE("NARGP captures a nonlinear map between levels") {
  std::mt19937_64 rng(4);
  const MFDataset mf{{sample(sin2pi_sq, uniform_vector(rng, 15, 0.0, 1.0)), sample(sin2pi, linspace(0.0, 1.0, 100))}};
  const auto model = train_nargp(mf, EstimatorOptions{});
  CHECK(model.levels()[0].gp.feature_dim() == 2);
  CHECK(model.levels()[0].gp.hyperparams().mean.kind == MeanKind::Zero);
  const DataSet test = sample(sin2pi_sq, linspace(0.0, 1.0, 200));
  CHECK(rmse(model.predict(test.inputs).mean, test.outputs) <= 0.05);
}

TEST_CASE("Estimator names round-trip") {
  for (auto k : {EstimatorKind::Proposed, EstimatorKind::Koh, EstimatorKind::Nargp, EstimatorKind::Cokriging,
                 EstimatorKind::Kriging})
    CHECK(estimator_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(estimator_kind_from_string("mfdgp"), ConfigurationError);
}

TEST_CASE("Per-level surrogate selection") {
  EstimatorOptions opts;
  CHECK(opts.surrogate_for_level(2, 3).kind == SurrogateKind::Gp);
  opts.surrogates = {{SurrogateKind::Knn, 3, MeanKind::Constant}};
  CHECK(opts.surrogate_for_level(3, 3).kind == SurrogateKind::Knn);
  opts.surrogates.push_back({SurrogateKind::Linear, 5, MeanKind::Constant});
  CHECK(opts.surrogate_for_level(2, 3).kind == SurrogateKind::Knn);
  CHECK(opts.surrogate_for_level(3, 3).kind == SurrogateKind::Linear);
  CHECK_THROWS_AS(opts.surrogate_for_level(2, 4), ConfigurationError);
  CHECK_THROWS_AS(opts.surrogate_for_level(1, 3), ConfigurationError);
}

TEST_CASE("Seed derivation is deterministic and stream dependent") {
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) != derive_seed(2, 2));
}

TEST_CASE("Kriging edge cases") {
  const DataSet flat{linspace(0.0, 1.0, 6), Vector::Constant(6, 4.25)};
  const auto model = train_kriging(flat, quick_cfg());
  const double fitted_mean = model.target_offset() + model.gp().hyperparams().mean.coefficients[0];
  CHECK(std::abs(fitted_mean - 4.25) <= 1e-4);

  DataSet single{Matrix::Constant(1, 1, 0.3), Vector::Constant(1, -1.5)};
  const auto one = train_kriging(single, quick_cfg());
  CHECK(one.predict(single.inputs).mean[0] == doctest::Approx(-1.5).epsilon(1e-6));
}

TEST_CASE("Shared surrogate cache reproduces uncached training") {
  const auto problem = gen_analytic(2);
  EstimatorOptions plain;
  plain.optimizer = quick_cfg();
  EstimatorOptions cached = plain;
  cached.surrogate_cache = std::make_shared<SurrogateCache>();

  const auto koh_plain = train_koh(problem.train, plain);
  const auto koh_cached = train_koh(problem.train, cached);
  const auto nargp_cached = train_nargp(problem.train, cached);
  const auto nargp_plain = train_nargp(problem.train, plain);
  CHECK(cached.surrogate_cache->hits() >= 1);

  const Matrix q = problem.test.inputs.topRows(40);
  CHECK(koh_cached.predict(q).mean == koh_plain.predict(q).mean);
  CHECK(koh_cached.predict(q).variance == koh_plain.predict(q).variance);
  CHECK(nargp_cached.predict(q).mean == nargp_plain.predict(q).mean);
  CHECK(nargp_cached.log_ml() == nargp_plain.log_ml());

  const std::size_t entries = cached.surrogate_cache->size();
  EstimatorOptions other_seed = cached;
  other_seed.optimizer.seed = 99;
  (void)train_koh(problem.train, other_seed);
  CHECK(cached.surrogate_cache->size() > entries);
}
