#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mfgp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent shapes, invalid hyperparameters, bad options.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// A factorization or gradient evaluation broke down.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double jitter = 0.0)
      : Error(what), jitter_(jitter) {}
  /// Last diagonal inflation attempted before giving up.
  double jitter() const noexcept { return jitter_; }

 private:
  double jitter_;
};

class OptimizationError : public Error {
 public:
  using Error::Error;
};

/// A problem exceeds a hard size limit of a dense solver.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Input that makes a statistic undefined (e.g. a constant vector).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace mfgp
