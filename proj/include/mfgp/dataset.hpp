#pragma once

#include "mfgp/types.hpp"

#include <cstddef>
#include <vector>

namespace mfgp {

/// Training inputs (rows are points) and scalar outputs of one fidelity level.
struct DataSet {
  Matrix inputs;
  Vector outputs;

  std::size_t size() const { return static_cast<std::size_t>(inputs.rows()); }
  std::size_t input_dim() const { return static_cast<std::size_t>(inputs.cols()); }
  /// N >= 1, d >= 1, finite, rows match outputs.
  void validate() const;
};

/// Fidelity levels ordered from the highest (index 0, the trusted level 1) to
/// the lowest (index K-1). Inputs need not be nested across levels.
struct MFDataset {
  std::vector<DataSet> levels;

  std::size_t num_levels() const { return levels.size(); }
  std::size_t input_dim() const { return levels.empty() ? 0 : levels.front().input_dim(); }
  /// Level `l` in 1-based fidelity numbering.
  const DataSet& level(std::size_t l) const { return levels.at(l - 1); }
  void validate() const;
};

/// Per-column affine map x -> (x - shift) / scale. Columns with zero spread
/// (or a single row) keep scale 1.
struct Standardizer {
  Vector shift;
  Vector scale;

  static Standardizer fit(const Matrix& data);
  static Standardizer identity(std::size_t dim);
  Matrix apply(const Matrix& data) const;
  std::size_t dim() const { return static_cast<std::size_t>(shift.size()); }
};

}  // namespace mfgp
