#include "doctest.h"
#include "test_support.hpp"

#include "mfgp/metrics.hpp"

#include <cmath>
#include <limits>

using namespace mfgp;
using namespace mfgp::testing;

namespace {
Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}
}  // namespace

TEST_CASE("RMSE examples") {
  CHECK(rmse(vec({1, 2, 3}), vec({1, 2, 3})) == 0.0);
  CHECK(rmse(vec({3, -4}), vec({0, 0})) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
  CHECK(std::sqrt(12.5) == doctest::Approx(3.53553).epsilon(1e-5));
  CHECK_THROWS_AS(rmse(vec({1}), vec({1, 2})), ConfigurationError);
  CHECK_THROWS_AS(rmse(Vector(0), Vector(0)), ConfigurationError);
}

TEST_CASE("RMSE and GP-RMSE are translation invariant") {
  std::mt19937_64 rng(1);
  const Vector p = uniform_vector(rng, 20), t = uniform_vector(rng, 20), v = uniform_vector(rng, 20, 0, 1);
  const Vector ps = (p.array() + 7.5).matrix(), ts = (t.array() + 7.5).matrix();
  CHECK(rmse(ps, ts) == doctest::Approx(rmse(p, t)).epsilon(1e-12));
  CHECK(gp_rmse(ps, v, ts) == doctest::Approx(gp_rmse(p, v, t)).epsilon(1e-12));
}

TEST_CASE("GP-RMSE") {
  std::mt19937_64 rng(2);
  const Vector m = uniform_vector(rng, 30), t = uniform_vector(rng, 30);
  CHECK(gp_rmse(m, Vector::Zero(30), t) == rmse(m, t));
  CHECK(gp_rmse(t, Vector::Ones(30), t) == doctest::Approx(1.0).epsilon(1e-15));
  const Vector v = uniform_vector(rng, 30, 0.0, 2.0);
  CHECK(gp_rmse(m, v, t) >= rmse(m, t));
  CHECK_THROWS_AS(gp_rmse(m, -Vector::Ones(30), t), ConfigurationError);
}

TEST_CASE("Squared correlation") {
  CHECK(r_squared(vec({1, 2, 3}), vec({3, 2, 1})) == doctest::Approx(1.0).epsilon(1e-15));
  std::mt19937_64 rng(3);
  const Vector t = uniform_vector(rng, 50);
  CHECK(r_squared((2.0 * t.array() + 1.0).matrix(), t) == doctest::Approx(1.0).epsilon(1e-14));
  for (int k = 0; k < 10; ++k) {
    const Vector a = uniform_vector(rng, 40), b = uniform_vector(rng, 40);
    // Two-pass covariance oracle.
    double ma = 0, mb = 0;
    for (Eigen::Index i = 0; i < 40; ++i) ma += a[i], mb += b[i];
    ma /= 40, mb /= 40;
    double sab = 0, saa = 0, sbb = 0;
    for (Eigen::Index i = 0; i < 40; ++i) {
      sab += (a[i] - ma) * (b[i] - mb);
      saa += (a[i] - ma) * (a[i] - ma);
      sbb += (b[i] - mb) * (b[i] - mb);
    }
    CHECK(std::abs(r_squared(a, b) - sab * sab / (saa * sbb)) <= 1e-12);
    const double r = r_squared(a, b);
    CHECK(r_squared((3.0 * a.array() - 2.0).matrix(), (0.5 * b.array() + 4.0).matrix()) ==
          doctest::Approx(r).epsilon(1e-12));
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
  CHECK_THROWS_AS(r_squared(vec({1, 1, 1}), vec({1, 2, 3})), DegenerateInputError);
  CHECK_THROWS_AS(r_squared(vec({1, 2, 3}), vec({2, 2, 2})), DegenerateInputError);
  CHECK_THROWS_AS(r_squared(vec({1}), vec({2})), DegenerateInputError);
}

TEST_CASE("Log-ML ratio") {
  CHECK(log_ml_ratio(3.0, 3.0) == 1.0);
  CHECK(log_ml_ratio(std::log(10.0), 0.0) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(log_ml_ratio(10.6686, 3.5025) == doctest::Approx(1.29e3).epsilon(1e-2));
  CHECK(log_ml_ratio(800.0, 0.0) == std::numeric_limits<double>::infinity());
  CHECK(std::isfinite(log_ml_ratio(700.0, 0.0)));
}

TEST_CASE("Confidence-interval coverage") {
  std::mt19937_64 rng(4);
  const Vector m = uniform_vector(rng, 10);
  CHECK(ci_coverage(m, Vector::Ones(10), m, 0.5) == 1.0);
  CHECK(ci_coverage(m, Vector::Zero(10), (m.array() + 1.0).matrix(), 3.0) == 0.0);

  std::normal_distribution<double> n01;
  const Eigen::Index M = 10000;
  Vector mean(M), var(M), truth(M);
  for (Eigen::Index i = 0; i < M; ++i) {
    mean[i] = 0.1 * static_cast<double>(i % 7);
    var[i] = 0.5 + static_cast<double>(i % 3);
    truth[i] = mean[i] + std::sqrt(var[i]) * n01(rng);
  }
  const double c2 = ci_coverage(mean, var, truth, 2.0);
  CHECK(c2 >= 0.90);
  CHECK(c2 <= 0.99);
  double prev = 0.0;
  for (double z : {0.0, 0.5, 1.0, 1.5, 2.0, 3.0}) {
    const double c = ci_coverage(mean, var, truth, z);
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("Metric reports carry capability-dependent fields") {
  const Vector t = vec({0.0, 1.0, 2.0, 3.5});
  const Vector p = vec({0.1, 0.9, 2.2, 3.4});
  const auto point = evaluate_point(p, t);
  CHECK_FALSE(point.gp_rmse.has_value());
  CHECK_FALSE(point.log_ml.has_value());
  const auto post = evaluate_posterior(p, Vector::Constant(4, 0.01), t, -3.0);
  CHECK(post.gp_rmse.has_value());
  CHECK(*post.log_ml == -3.0);
  CHECK(post.rmse == point.rmse);
  CHECK(point.r_squared.has_value());
  CHECK_FALSE(evaluate_point(Vector::Ones(4), t).r_squared.has_value());
}
