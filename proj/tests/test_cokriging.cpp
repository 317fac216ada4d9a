#include "doctest.h"
#include "test_support.hpp"

#include "mfgp/cokriging.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace mfgp;
using namespace mfgp::testing;

namespace {

CokrigingHyperparams random_hp(std::mt19937_64& rng, Eigen::Index K, std::size_t R, Eigen::Index d) {
  CokrigingHyperparams hp;
  for (std::size_t r = 0; r < R; ++r) hp.lengthscales.push_back(uniform_vector(rng, d, 0.3, 1.5));
  hp.loadings = uniform_matrix(rng, K, static_cast<Eigen::Index>(R), -1.5, 1.5);
  hp.diagonals = uniform_matrix(rng, K, static_cast<Eigen::Index>(R), 0.01, 0.5);
  hp.noise_std = uniform_vector(rng, K, 0.05, 0.3);
  hp.means = uniform_vector(rng, K);
  return hp;
}

}  // namespace

TEST_CASE("Single-level, rank-one cokriging equals kriging at matched parameters") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 5; ++t) {
    const Matrix X = uniform_matrix(rng, 15, 2);
    const Vector y = uniform_vector(rng, 15);
    const Vector ls = uniform_vector(rng, 2, 0.3, 1.5);
    const double noise = 0.05 + 0.1 * t, mean = 0.3 * t - 0.5;
    CokrigingHyperparams hp;
    hp.lengthscales = {ls};
    hp.loadings = Matrix::Ones(1, 1);
    hp.diagonals = Matrix::Zero(1, 1);
    hp.noise_std = Vector::Constant(1, noise);
    hp.means = Vector::Constant(1, mean);
    const double co = cokriging_log_ml({X}, {y}, hp);
    const double kr =
        fit_gp(X, y, GPHyperparams{ArdKernel{1.0, ls}, MeanFunction::constant(mean), noise}).log_marginal_likelihood();
    CHECK(std::abs(co - kr) <= 1e-8);
  }
}

TEST_CASE("Joint Gram matrix is positive semidefinite and matches the block reference") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const Eigen::Index K = 2 + t % 3;
    const Eigen::Index d = 1 + t % 3;
    std::vector<Matrix> X;
    for (Eigen::Index l = 0; l < K; ++l) X.push_back(uniform_matrix(rng, 4 + static_cast<Eigen::Index>(rng() % 12), d));
    const auto hp = random_hp(rng, K, 1 + static_cast<std::size_t>(t % 3), d);
    const Matrix C = cokriging_gram(X, hp, false);
    CHECK(C == serial::cokriging_gram(X, hp, false));
    CHECK(C.isApprox(C.transpose(), 0.0));
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(C).eigenvalues();
    CHECK(ev.minCoeff() >= -1e-8 * ev.cwiseAbs().maxCoeff());
    for (std::size_t r = 0; r < hp.rank(); ++r)
      CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(hp.coefficient_matrix(r)).eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("Cokriging gradient matches central finite differences") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 4; ++t) {
    const Eigen::Index K = 1 + t % 3;
    const Eigen::Index d = 1 + t % 2;
    const std::size_t R = 1 + static_cast<std::size_t>(t % 2);
    std::vector<Matrix> X;
    std::vector<Vector> y;
    for (Eigen::Index l = 0; l < K; ++l) {
      X.push_back(uniform_matrix(rng, 5 + l, d));
      y.push_back(uniform_vector(rng, 5 + l));
    }
    const auto hp = random_hp(rng, K, R, d);
    const Vector v = cokriging_to_unconstrained(hp);
    const auto eval = cokriging_value_and_gradient(X, y, hp);
    CHECK(eval.log_ml == cokriging_log_ml(X, y, hp));
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      Vector vp = v, vm = v;
      vp[j] += 1e-5;
      vm[j] -= 1e-5;
      const auto K_ = static_cast<std::size_t>(K);
      const auto d_ = static_cast<std::size_t>(d);
      const double fd = (cokriging_log_ml(X, y, cokriging_from_unconstrained(K_, R, d_, vp)) -
                         cokriging_log_ml(X, y, cokriging_from_unconstrained(K_, R, d_, vm))) /
                        2e-5;
      INFO("t=", t, " j=", j, " grad=", eval.gradient[j], " fd=", fd);
      CHECK(std::abs(eval.gradient[j] - fd) <= std::max(1e-5 * std::abs(fd), 1e-8));
    }
  }
}

TEST_CASE("Unconstrained cokriging parameters round-trip") {
  std::mt19937_64 rng(4);
  const auto hp = random_hp(rng, 3, 2, 2);
  const Vector v = cokriging_to_unconstrained(hp);
  CHECK(static_cast<std::size_t>(v.size()) == cokriging_unconstrained_size(3, 2, 2));
  const auto back = cokriging_from_unconstrained(3, 2, 2, v);
  CHECK(back.loadings.isApprox(hp.loadings, 1e-12));
  CHECK(back.diagonals.isApprox(hp.diagonals, 1e-12));
  CHECK(back.noise_std.isApprox(hp.noise_std, 1e-12));
  CHECK(back.lengthscales[1].isApprox(hp.lengthscales[1], 1e-12));
  CHECK_THROWS_AS(cokriging_from_unconstrained(3, 2, 3, v), ConfigurationError);
}

TEST_CASE("Two identical levels behave like kriging on the pooled data") {
  std::mt19937_64 rng(5);
  const Matrix X = uniform_matrix(rng, 10, 1);
  const Vector y = (2.0 * X.col(0)).array().sin();
  const Vector ls = Vector::Constant(1, 0.6);
  CokrigingHyperparams hp;
  hp.lengthscales = {ls};
  hp.loadings = Matrix::Ones(2, 1);
  hp.diagonals = Matrix::Zero(2, 1);
  hp.noise_std = Vector::Constant(2, 0.1);
  hp.means = Vector::Constant(2, 0.2);

  const Matrix C = cokriging_gram({X, X}, hp, false);
  CHECK(C.block(0, 10, 10, 10) == C.block(0, 0, 10, 10));
  CHECK(C.block(10, 10, 10, 10) == C.block(0, 0, 10, 10));

  const CokrigingModel model(Standardizer::identity(1), {X, X}, {y, y}, hp);
  Matrix pooled(20, 1);
  pooled << X, X;
  Vector py(20);
  py << y, y;
  const auto gp = fit_gp(pooled, py, GPHyperparams{ArdKernel{1.0, ls}, MeanFunction::constant(0.2), 0.1});
  const Matrix q = uniform_matrix(rng, 30, 1, -1.3, 1.3);
  const auto a = model.predict(q);
  const auto b = gp.posterior(q);
  CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((a.variance - b.variance).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(model.log_ml() == doctest::Approx(gp.log_marginal_likelihood()).epsilon(1e-9));
}

TEST_CASE("Cokriging training, prediction and the size guard") {
  MFDataset mf;
  const Vector x1 = (Vector(6) << 0.0, 0.2, 0.4, 0.6, 0.8, 1.0).finished();
  const Vector x2 = Eigen::VectorXd::LinSpaced(25, 0.0, 1.0);
  mf.levels.push_back({x1, (3.0 * x1).array().sin() + 0.1});
  mf.levels.push_back({x2, (3.0 * x2).array().sin()});
  EstimatorOptions opts;
  opts.optimizer.patience = 50;
  opts.optimizer.max_iterations = 300;
  const auto model = train_cokriging(mf, opts);
  CHECK(model.hyperparams().rank() == 2);
  CHECK(model.hyperparams().num_levels() == 2);
  CHECK(std::isfinite(model.log_ml()));
  const Matrix q = Eigen::VectorXd::LinSpaced(11, 0.0, 1.0);
  const auto post = model.predict(q);
  CHECK(post.mean.size() == 11);
  CHECK(post.variance.minCoeff() >= 0.0);
  const Vector truth = (3.0 * q.col(0)).array().sin() + 0.1;
  CHECK((post.mean - truth).cwiseAbs().maxCoeff() <= 0.1);

  opts.cokriging_max_points = 30;
  try {
    train_cokriging(mf, opts);
    FAIL("expected CapacityError");
  } catch (const CapacityError& e) {
    CHECK(std::string(e.what()).find("30") != std::string::npos);
  }
}
