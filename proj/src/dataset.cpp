#include "mfgp/dataset.hpp"

#include <cmath>
#include <string>

namespace mfgp {

void DataSet::validate() const {
  if (inputs.rows() < 1) throw ConfigurationError("dataset has no rows");
  if (inputs.cols() < 1) throw ConfigurationError("dataset has no input columns");
  if (inputs.rows() != outputs.size())
    throw ConfigurationError("dataset has " + std::to_string(inputs.rows()) + " input rows but " +
                             std::to_string(outputs.size()) + " outputs");
  if (!inputs.allFinite() || !outputs.allFinite()) throw ConfigurationError("dataset contains non-finite values");
}

void MFDataset::validate() const {
  if (levels.empty()) throw ConfigurationError("multifidelity dataset has no levels");
  const std::size_t d = levels.front().input_dim();
  for (std::size_t l = 0; l < levels.size(); ++l) {
    levels[l].validate();
    if (levels[l].input_dim() != d)
      throw ConfigurationError("level " + std::to_string(l + 1) + " has input dimension " +
                               std::to_string(levels[l].input_dim()) + ", level 1 has " + std::to_string(d));
  }
}

Standardizer Standardizer::fit(const Matrix& data) {
  Standardizer s;
  const Eigen::Index n = data.rows();
  s.shift = data.colwise().mean().transpose();
  s.scale = Vector::Ones(data.cols());
  if (n > 1) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      const double var = (data.col(c).array() - s.shift[c]).square().sum() / static_cast<double>(n - 1);
      const double sd = std::sqrt(var);
      if (sd > 0.0 && std::isfinite(sd)) s.scale[c] = sd;
    }
  }
  return s;
}

Standardizer Standardizer::identity(std::size_t dim) {
  return {Vector::Zero(static_cast<Eigen::Index>(dim)), Vector::Ones(static_cast<Eigen::Index>(dim))};
}

Matrix Standardizer::apply(const Matrix& data) const {
  if (static_cast<std::size_t>(data.cols()) != dim())
    throw ConfigurationError("standardizer expects " + std::to_string(dim()) + " columns, got " +
                             std::to_string(data.cols()));
  return ((data.rowwise() - shift.transpose()).array().rowwise() / scale.transpose().array()).matrix();
}

}  // namespace mfgp
