#include "mfgp/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mfgp {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& message) {
  throw ParseError(source + ":" + std::to_string(line) + ": " + message);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Eigen::Index CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<Eigen::Index>(i);
  return -1;
}

CsvTable parse_csv_table(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  CsvTable table;
  std::vector<std::vector<double>> rows;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = trim(line);
    if (lineno == 1 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
    if (view.empty()) continue;
    const auto fields = split(view);
    if (!have_header) {
      for (const auto f : fields) {
        if (f.empty()) fail(source, lineno, "empty column name in header");
        table.header.emplace_back(f);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size())
      fail(source, lineno,
           "expected " + std::to_string(table.header.size()) + " fields, found " + std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto f : fields) {
      double v = 0.0;
      const char* first = f.data();
      const char* last = f.data() + f.size();
      if (!f.empty() && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (f.empty() || ec != std::errc() || ptr != last)
        fail(source, lineno, "malformed number '" + std::string(f) + "'");
      if (!std::isfinite(v)) fail(source, lineno, "non-finite value '" + std::string(f) + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) fail(source, lineno, "missing header row");
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return table;
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv_table(buf.str(), path.string());
}

std::string format_csv_table(const std::vector<std::string>& header, const Matrix& values) {
  if (static_cast<std::size_t>(values.cols()) != header.size())
    throw ConfigurationError("CSV header has " + std::to_string(header.size()) + " names for " +
                             std::to_string(values.cols()) + " columns");
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) out += (c ? "," : "") + format_double(values(r, c));
    out += '\n';
  }
  return out;
}

void write_csv_table(const std::filesystem::path& path, const std::vector<std::string>& header, const Matrix& values) {
  const std::string text = format_csv_table(header, values);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

DataSet load_dataset_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv_table(path);
  const auto cols = static_cast<Eigen::Index>(table.header.size());
  if (cols < 2) throw SchemaError(path.string() + ": need at least one input column and an output column");
  for (Eigen::Index c = 0; c + 1 < cols; ++c)
    if (table.header[static_cast<std::size_t>(c)] != "x" + std::to_string(c + 1))
      throw SchemaError(path.string() + ": column " + std::to_string(c + 1) + " should be named x" +
                        std::to_string(c + 1) + ", found '" + table.header[static_cast<std::size_t>(c)] + "'");
  if (table.header.back() != "y")
    throw SchemaError(path.string() + ": last column should be named y, found '" + table.header.back() + "'");
  if (table.values.rows() < 1) throw SchemaError(path.string() + ": no data rows");
  return {table.values.leftCols(cols - 1), table.values.col(cols - 1)};
}

void write_dataset_csv(const std::filesystem::path& path, const DataSet& data) {
  std::vector<std::string> header;
  for (std::size_t c = 0; c < data.input_dim(); ++c) header.push_back("x" + std::to_string(c + 1));
  header.emplace_back("y");
  Matrix values(data.inputs.rows(), data.inputs.cols() + 1);
  values << data.inputs, data.outputs;
  write_csv_table(path, header, values);
}

MFDataset load_mf_csv(const std::vector<std::filesystem::path>& paths) {
  if (paths.empty()) throw ConfigurationError("no CSV files given");
  MFDataset mf;
  for (const auto& p : paths) {
    mf.levels.push_back(load_dataset_csv(p));
    if (mf.levels.back().input_dim() != mf.levels.front().input_dim())
      throw SchemaError(p.string() + ": input dimension " + std::to_string(mf.levels.back().input_dim()) +
                        " differs from " + std::to_string(mf.levels.front().input_dim()) + " in " +
                        paths.front().string());
  }
  return mf;
}

}  // namespace mfgp
