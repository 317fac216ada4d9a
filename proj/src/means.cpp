#include "mfgp/means.hpp"

#include <string>
#include <utility>

namespace mfgp {

const char* to_string(MeanKind kind) {
  switch (kind) {
    case MeanKind::Zero: return "zero";
    case MeanKind::Constant: return "constant";
    case MeanKind::Linear: return "linear";
  }
  return "unknown";
}

MeanKind mean_kind_from_string(const std::string& name) {
  if (name == "zero") return MeanKind::Zero;
  if (name == "constant") return MeanKind::Constant;
  if (name == "linear") return MeanKind::Linear;
  throw ConfigurationError("unknown mean function '" + name + "'");
}

std::size_t mean_arity(MeanKind kind, std::size_t feature_dim) {
  switch (kind) {
    case MeanKind::Zero: return 0;
    case MeanKind::Constant: return 1;
    case MeanKind::Linear: return feature_dim + 1;
  }
  return 0;
}

MeanFunction MeanFunction::constant(double gamma) {
  return {MeanKind::Constant, Vector::Constant(1, gamma)};
}

MeanFunction MeanFunction::linear(Vector coefficients) {
  if (coefficients.size() < 1) throw ConfigurationError("linear mean needs at least an intercept");
  return {MeanKind::Linear, std::move(coefficients)};
}

MeanFunction MeanFunction::zeros(MeanKind kind, std::size_t feature_dim) {
  return {kind, Vector::Zero(static_cast<Eigen::Index>(mean_arity(kind, feature_dim)))};
}

void MeanFunction::check_features(std::size_t feature_dim) const {
  const std::size_t expected = mean_arity(kind, feature_dim);
  if (arity() != expected)
    throw ConfigurationError(std::string(to_string(kind)) + " mean over " + std::to_string(feature_dim) +
                             " features needs " + std::to_string(expected) + " coefficients, has " +
                             std::to_string(arity()));
}

double MeanFunction::operator()(std::span<const double> phi) const {
  switch (kind) {
    case MeanKind::Zero: return 0.0;
    case MeanKind::Constant: return coefficients[0];
    case MeanKind::Linear: {
      check_features(phi.size());
      double value = coefficients[coefficients.size() - 1];
      for (std::size_t i = 0; i < phi.size(); ++i) value += coefficients[static_cast<Eigen::Index>(i)] * phi[i];
      return value;
    }
  }
  return 0.0;
}

Vector MeanFunction::evaluate(const Matrix& features) const {
  check_features(static_cast<std::size_t>(features.cols()));
  switch (kind) {
    case MeanKind::Zero: return Vector::Zero(features.rows());
    case MeanKind::Constant: return Vector::Constant(features.rows(), coefficients[0]);
    case MeanKind::Linear: {
      const Eigen::Index m = features.cols();
      Vector out(features.rows());
      for (Eigen::Index i = 0; i < features.rows(); ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) s += features(i, j) * coefficients[j];
        out[i] = s + coefficients[m];
      }
      return out;
    }
  }
  return Vector::Zero(features.rows());
}

Matrix MeanFunction::jacobian(const Matrix& features) const {
  check_features(static_cast<std::size_t>(features.cols()));
  const Eigen::Index n = features.rows();
  switch (kind) {
    case MeanKind::Zero: return Matrix(n, 0);
    case MeanKind::Constant: return Matrix::Ones(n, 1);
    case MeanKind::Linear: {
      Matrix jac(n, features.cols() + 1);
      jac.leftCols(features.cols()) = features;
      jac.col(features.cols()).setOnes();
      return jac;
    }
  }
  return Matrix(n, 0);
}

}  // namespace mfgp
