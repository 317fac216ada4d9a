#pragma once

// Comma-separated numeric tables with a header row. Values are finite
// decimals with '.' as the decimal point; NaN and infinities are rejected.

#include "mfgp/dataset.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mfgp {

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;  // one row per data line

  /// Index of a named column, or -1.
  Eigen::Index column(const std::string& name) const;
};

/// Throws ParseError naming file and line on malformed content.
CsvTable read_csv_table(const std::filesystem::path& path);
CsvTable parse_csv_table(const std::string& text, const std::string& source = "<string>");

/// Writes with 17 significant digits so that values round-trip exactly.
void write_csv_table(const std::filesystem::path& path, const std::vector<std::string>& header, const Matrix& values);
std::string format_csv_table(const std::vector<std::string>& header, const Matrix& values);

/// A training file with header x1..xd,y (the last column is the output).
DataSet load_dataset_csv(const std::filesystem::path& path);
void write_dataset_csv(const std::filesystem::path& path, const DataSet& data);

/// Levels follow path order, the first path being level 1. Throws SchemaError
/// when files disagree on d.
MFDataset load_mf_csv(const std::vector<std::filesystem::path>& paths);

}  // namespace mfgp
