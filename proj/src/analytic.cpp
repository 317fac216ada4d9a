#include "mfgp/analytic.hpp"

#include "mfgp/estimators.hpp"

#include <boost/math/special_functions/sin_pi.hpp>

#include <cmath>
#include <random>

namespace mfgp {

const char* to_string(Sampling s) { return s == Sampling::Linspace ? "linspace" : "uniform"; }

Sampling sampling_from_string(const std::string& name) {
  if (name == "linspace") return Sampling::Linspace;
  if (name == "uniform") return Sampling::Uniform;
  throw ConfigurationError("unknown sampling '" + name + "' (expected linspace or uniform)");
}

double analytic_level(std::size_t level, double x) {
  switch (level) {
    case 1: return boost::math::sin_pi(2.0 * x) * std::exp(-x);
    case 2: return boost::math::sin_pi(2.0 * x);
    case 3: return std::exp(-x);
    default: throw ConfigurationError("analytic problem has levels 1..3, not " + std::to_string(level));
  }
}

Vector linspace(double lower, double upper, std::size_t count) {
  Vector out(static_cast<Eigen::Index>(count));
  if (count == 1) {
    out[0] = lower;
    return out;
  }
  const double step = (upper - lower) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[static_cast<Eigen::Index>(i)] = lower + step * static_cast<double>(i);
  if (count > 1) out[static_cast<Eigen::Index>(count - 1)] = upper;
  return out;
}

AnalyticProblem gen_analytic(std::uint64_t seed, const AnalyticOptions& opts) {
  if (!(opts.upper > opts.lower)) throw ConfigurationError("analytic domain must have upper > lower");
  if (opts.test_points < 1) throw ConfigurationError("analytic test grid needs at least one point");
  AnalyticProblem p;
  for (std::size_t l = 1; l <= 3; ++l) {
    const std::size_t n = opts.sizes[l - 1];
    if (n < 1) throw ConfigurationError("analytic level sizes must be positive");
    Vector x;
    if ((l == 1 ? opts.high : opts.low) == Sampling::Linspace) {
      x = linspace(opts.lower, opts.upper, n);
    } else {
      std::mt19937_64 rng(derive_seed(seed, 1000 + l));
      x.resize(static_cast<Eigen::Index>(n));
      for (auto& v : x) v = opts.lower + (opts.upper - opts.lower) * std::ldexp(static_cast<double>(rng() >> 11), -53);
    }
    DataSet level{x, Vector(x.size())};
    for (Eigen::Index i = 0; i < x.size(); ++i) level.outputs[i] = analytic_level(l, x[i]);
    p.train.levels.push_back(std::move(level));
  }
  const Vector xt = linspace(opts.lower, opts.upper, opts.test_points);
  p.test = {xt, Vector(xt.size())};
  for (Eigen::Index i = 0; i < xt.size(); ++i) p.test.outputs[i] = analytic_level(1, xt[i]);
  return p;
}

}  // namespace mfgp
