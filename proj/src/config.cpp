#include "mfgp/config.hpp"

#include <boost/algorithm/string.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace mfgp {
namespace {

// Sections are kept in file order, including sections without keys.
struct IniSection {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;

  const std::string* find(const std::string& key) const {
    for (const auto& [k, v] : entries)
      if (k == key) return &v;
    return nullptr;
  }
  std::size_t count(const std::string& key) const { return find(key) ? 1 : 0; }
};

std::vector<IniSection> read_ini(const std::string& text) {
  std::vector<IniSection> sections;
  std::set<std::string> names;
  std::istringstream in(text);
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    boost::trim(line);
    if (line.empty() || line.front() == ';' || line.front() == '#') continue;
    const std::string where = "config line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigurationError(where + ": unterminated section header");
      std::string name = boost::trim_copy(line.substr(1, line.size() - 2));
      if (name.empty()) throw ConfigurationError(where + ": empty section name");
      if (!names.insert(name).second) throw ConfigurationError(where + ": section [" + name + "] repeated");
      sections.push_back({std::move(name), {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigurationError(where + ": expected key = value");
    std::string key = boost::trim_copy(line.substr(0, eq));
    std::string value = boost::trim_copy(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front())
      value = value.substr(1, value.size() - 2);
    if (key.empty()) throw ConfigurationError(where + ": empty key");
    if (sections.empty()) throw ConfigurationError("config key '" + key + "' appears outside any section");
    if (sections.back().find(key))
      throw ConfigurationError(where + ": key '" + key + "' repeated in [" + sections.back().name + "]");
    sections.back().entries.emplace_back(std::move(key), std::move(value));
  }
  return sections;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  boost::split(parts, s, boost::is_any_of(","));
  std::vector<std::string> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

void check_keys(const IniSection& section, const std::string& name, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : section.entries)
    if (!allowed.count(key)) throw ConfigurationError("unknown key '" + key + "' in section [" + name + "]");
}

template <typename T>
T parse_value(const std::string& raw, const std::string& context) {
  std::istringstream in(raw);
  T value{};
  if constexpr (std::is_same_v<T, bool>) {
    if (raw == "true" || raw == "1" || raw == "yes") return true;
    if (raw == "false" || raw == "0" || raw == "no") return false;
    throw ConfigurationError(context + ": expected a boolean, got '" + raw + "'");
  } else {
    if (std::is_unsigned_v<T> && !raw.empty() && raw.front() == '-')
      throw ConfigurationError(context + ": expected a nonnegative integer, got '" + raw + "'");
    in >> value;
  }
  if (raw.empty() || in.fail() || !in.eof()) throw ConfigurationError(context + ": cannot parse '" + raw + "'");
  return value;
}

template <typename T>
T get(const IniSection& section, const std::string& section_name, const std::string& key, T fallback) {
  const std::string* raw = section.find(key);
  if (!raw) return fallback;
  return parse_value<T>(*raw, "[" + section_name + "] " + key);
}

std::string get_string(const IniSection& section, const std::string& key, const std::string& fallback) {
  const std::string* raw = section.find(key);
  return raw ? *raw : fallback;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

}  // namespace

std::vector<EstimatorEntry> BenchConfig::resolved_estimators() const {
  std::vector<EstimatorEntry> out = estimators;
  if (out.empty())
    for (auto kind : {EstimatorKind::Proposed, EstimatorKind::Koh, EstimatorKind::Nargp, EstimatorKind::Cokriging,
                      EstimatorKind::Kriging})
      out.push_back({kind, {}});
  for (auto& e : out) {
    e.options.optimizer = optimizer;
    e.options.optimizer.seed = seed;
  }
  return out;
}

void BenchConfig::validate() const {
  optimizer.validate();
  if (source == DataSource::Csv) {
    if (train_csv.empty()) throw ConfigurationError("[data] source = csv needs train paths");
    for (const auto& p : train_csv)
      if (!std::filesystem::exists(p)) throw ConfigurationError("training file not found: " + p.string());
    if (test_csv.empty()) throw ConfigurationError("[data] source = csv needs a test path");
    if (!std::filesystem::exists(test_csv)) throw ConfigurationError("test file not found: " + test_csv.string());
  }
  if (!(ci_z > 0.0)) throw ConfigurationError("[output] ci_z must be positive");
  for (const auto& e : estimators)
    for (const auto& s : e.options.surrogates)
      if (s.kind == SurrogateKind::Knn && s.knn_k < 1) throw ConfigurationError("knn_k must be at least 1");
}

nlohmann::ordered_json BenchConfig::echo() const {
  nlohmann::ordered_json j;
  auto& data = j["data"];
  data["source"] = source == DataSource::Analytic ? "analytic" : "csv";
  data["seed"] = seed;
  if (source == DataSource::Analytic) {
    data["high_sampling"] = to_string(analytic.high);
    data["low_sampling"] = to_string(analytic.low);
    data["sizes"] = analytic.sizes;
    data["lower"] = analytic.lower;
    data["upper"] = analytic.upper;
    data["test_points"] = analytic.test_points;
  } else {
    auto& train = data["train"] = nlohmann::ordered_json::array();
    for (const auto& p : train_csv) train.push_back(p.generic_string());
    data["test"] = test_csv.generic_string();
  }
  j["optimizer"] = {{"patience", optimizer.patience},
                    {"max_iterations", optimizer.max_iterations},
                    {"restarts", optimizer.restarts},
                    {"learning_rate", optimizer.learning_rate},
                    {"restart_spread", optimizer.restart_spread}};
  auto& est = j["estimators"] = nlohmann::ordered_json::array();
  for (const auto& e : resolved_estimators()) {
    nlohmann::ordered_json entry;
    entry["name"] = to_string(e.kind);
    if (e.kind == EstimatorKind::Proposed || e.kind == EstimatorKind::Koh || e.kind == EstimatorKind::Nargp) {
      auto& surr = entry["surrogates"] = nlohmann::ordered_json::array();
      for (const auto& s : e.options.surrogates)
        surr.push_back({{"kind", to_string(s.kind)}, {"knn_k", s.knn_k}, {"gp_mean", to_string(s.gp_mean)}});
    }
    if (e.kind == EstimatorKind::Koh) entry["fix_rho_zero"] = e.options.koh_fix_rho_zero;
    if (e.kind == EstimatorKind::Cokriging) {
      entry["rank"] = e.options.cokriging_rank;
      entry["max_points"] = e.options.cokriging_max_points;
    }
    est.push_back(std::move(entry));
  }
  j["output"] = {{"ci_z", ci_z}};
  return j;
}

BenchConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  BenchConfig cfg;
  std::set<EstimatorKind> seen;
  for (const auto& section : read_ini(text)) {
    const std::string& name = section.name;
    if (name == "data") {
      check_keys(section, name,
                 {"source", "seed", "train", "test", "high_sampling", "low_sampling", "sizes", "lower", "upper",
                  "test_points"});
      const std::string source = get_string(section, "source", "analytic");
      if (source == "analytic") cfg.source = DataSource::Analytic;
      else if (source == "csv") cfg.source = DataSource::Csv;
      else throw ConfigurationError("[data] source must be analytic or csv, got '" + source + "'");
      cfg.seed = get<std::uint64_t>(section, name, "seed", cfg.seed);
      for (const auto& p : split_list(get_string(section, "train", ""))) cfg.train_csv.push_back(resolve(base_dir, p));
      const std::string test = get_string(section, "test", "");
      if (!test.empty()) cfg.test_csv = resolve(base_dir, test);
      cfg.analytic.high = sampling_from_string(get_string(section, "high_sampling", to_string(cfg.analytic.high)));
      cfg.analytic.low = sampling_from_string(get_string(section, "low_sampling", to_string(cfg.analytic.low)));
      const auto sizes = split_list(get_string(section, "sizes", ""));
      if (!sizes.empty()) {
        if (sizes.size() != 3) throw ConfigurationError("[data] sizes needs three entries");
        for (std::size_t i = 0; i < 3; ++i) cfg.analytic.sizes[i] = parse_value<std::size_t>(sizes[i], "[data] sizes");
      }
      cfg.analytic.lower = get<double>(section, name, "lower", cfg.analytic.lower);
      cfg.analytic.upper = get<double>(section, name, "upper", cfg.analytic.upper);
      cfg.analytic.test_points = get<std::size_t>(section, name, "test_points", cfg.analytic.test_points);
    } else if (name == "optimizer") {
      check_keys(section, name, {"patience", "max_iterations", "restarts", "learning_rate", "restart_spread"});
      cfg.optimizer.patience = get<std::size_t>(section, name, "patience", cfg.optimizer.patience);
      cfg.optimizer.max_iterations = get<std::size_t>(section, name, "max_iterations", cfg.optimizer.max_iterations);
      cfg.optimizer.restarts = get<std::size_t>(section, name, "restarts", cfg.optimizer.restarts);
      cfg.optimizer.learning_rate = get<double>(section, name, "learning_rate", cfg.optimizer.learning_rate);
      cfg.optimizer.restart_spread = get<double>(section, name, "restart_spread", cfg.optimizer.restart_spread);
    } else if (name == "output") {
      check_keys(section, name, {"report", "model", "ci_z"});
      cfg.report = resolve(base_dir, get_string(section, "report", cfg.report.string()));
      const std::string model = get_string(section, "model", "");
      if (!model.empty()) cfg.model = resolve(base_dir, model);
      cfg.ci_z = get<double>(section, name, "ci_z", cfg.ci_z);
    } else if (name.rfind("estimators.", 0) == 0) {
      EstimatorEntry entry{estimator_kind_from_string(name.substr(11)), {}};
      if (!seen.insert(entry.kind).second) throw ConfigurationError("estimator section [" + name + "] repeated");
      std::set<std::string> allowed;
      if (entry.kind == EstimatorKind::Proposed || entry.kind == EstimatorKind::Koh ||
          entry.kind == EstimatorKind::Nargp)
        allowed = {"surrogate", "surrogates", "knn_k", "gp_mean"};
      if (entry.kind == EstimatorKind::Koh) allowed.insert("fix_rho_zero");
      if (entry.kind == EstimatorKind::Cokriging) allowed = {"rank", "max_points"};
      check_keys(section, name, allowed);
      const std::size_t k = get<std::size_t>(section, name, "knn_k", kDefaultKnnNeighbours);
      const MeanKind mean = mean_kind_from_string(get_string(section, "gp_mean", "constant"));
      if (section.count("surrogate") && section.count("surrogates"))
        throw ConfigurationError("[" + name + "] sets both surrogate and surrogates");
      const std::string surrogate_list = get_string(section, "surrogates", get_string(section, "surrogate", ""));
      for (const auto& s : split_list(surrogate_list))
        entry.options.surrogates.push_back({surrogate_kind_from_string(s), k, mean});
      if (entry.options.surrogates.empty() && (section.count("knn_k") || section.count("gp_mean")))
        entry.options.surrogates.push_back({SurrogateKind::Gp, k, mean});
      entry.options.koh_fix_rho_zero = get<bool>(section, name, "fix_rho_zero", false);
      entry.options.cokriging_rank = get<std::size_t>(section, name, "rank", entry.options.cokriging_rank);
      entry.options.cokriging_max_points =
          get<std::size_t>(section, name, "max_points", entry.options.cokriging_max_points);
      cfg.estimators.push_back(std::move(entry));
    } else {
      throw ConfigurationError("unknown config section [" + name + "]");
    }
  }
  cfg.validate();
  return cfg;
}

BenchConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

}  // namespace mfgp
