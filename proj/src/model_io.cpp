#include "mfgp/model_io.hpp"

#include "mfgp/cokriging.hpp"

#include <fstream>
#include <sstream>

namespace mfgp {
namespace {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

ojson vec_json(const Vector& v) { return ojson(std::vector<double>(v.data(), v.data() + v.size())); }

ojson mat_json(const Matrix& m) {
  ojson rows = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec_json(m.row(r).transpose()));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Vector json_vec(const json& j) {
  if (!j.is_array()) throw SchemaError("model file: expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

Matrix json_mat(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows) throw SchemaError("model file: matrix row count mismatch");
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vector row = json_vec(data[static_cast<std::size_t>(r)]);
    if (row.size() != cols) throw SchemaError("model file: matrix column count mismatch");
    m.row(r) = row.transpose();
  }
  return m;
}

ojson ard_json(const ArdKernel& k) { return {{"amplitude", k.amplitude}, {"lengthscales", vec_json(k.lengthscales)}}; }
ArdKernel json_ard(const json& j) { return {j.at("amplitude").get<double>(), json_vec(j.at("lengthscales"))}; }

ojson kernel_json(const Kernel& kernel) {
  if (const auto* a = std::get_if<ArdKernel>(&kernel)) {
    ojson j = ard_json(*a);
    j["type"] = "ard";
    return j;
  }
  const auto& n = std::get<NargpKernel>(kernel);
  return {{"type", "nargp"},
          {"input_scale", ard_json(n.input_scale)},
          {"lowfi", ard_json(n.lowfi)},
          {"discrepancy", ard_json(n.discrepancy)}};
}

Kernel json_kernel(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "ard") return json_ard(j);
  if (type == "nargp")
    return NargpKernel(json_ard(j.at("input_scale")), json_ard(j.at("lowfi")), json_ard(j.at("discrepancy")));
  throw SchemaError("model file: unknown kernel type '" + type + "'");
}

ojson gp_json(const TrainedGP& gp) {
  const auto& hp = gp.hyperparams();
  return {{"features", mat_json(gp.features())},
          {"targets", vec_json(gp.targets())},
          {"kernel", kernel_json(hp.kernel)},
          {"mean", {{"kind", to_string(hp.mean.kind)}, {"coefficients", vec_json(hp.mean.coefficients)}}},
          {"noise_std", hp.noise_std}};
}

TrainedGP json_gp(const json& j) {
  GPHyperparams hp;
  hp.kernel = json_kernel(j.at("kernel"));
  hp.mean.kind = mean_kind_from_string(j.at("mean").at("kind").get<std::string>());
  hp.mean.coefficients = json_vec(j.at("mean").at("coefficients"));
  hp.noise_std = j.at("noise_std").get<double>();
  return fit_gp(json_mat(j.at("features")), json_vec(j.at("targets")), hp);
}

ojson standardizer_json(const Standardizer& s) { return {{"shift", vec_json(s.shift)}, {"scale", vec_json(s.scale)}}; }
Standardizer json_standardizer(const json& j) { return {json_vec(j.at("shift")), json_vec(j.at("scale"))}; }

ojson predictor_json(const PointPredictor& p) {
  if (const auto* knn = dynamic_cast<const KnnModel*>(&p))
    return {{"type", "knn"}, {"k", knn->k()}, {"features", mat_json(knn->features())}, {"targets", vec_json(knn->targets())}};
  if (const auto* lin = dynamic_cast<const LinearModel*>(&p)) return {{"type", "linear"}, {"weights", vec_json(lin->weights())}};
  if (const auto* gp = dynamic_cast<const GpMeanPredictor*>(&p)) return {{"type", "gp"}, {"gp", gp_json(gp->gp())}};
  throw SchemaError("model file: cannot serialize predictor of kind '" + std::string(p.kind()) + "'");
}

PredictorPtr json_predictor(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "knn")
    return std::make_shared<const KnnModel>(json_mat(j.at("features")), json_vec(j.at("targets")),
                                            j.at("k").get<std::size_t>());
  if (type == "linear") return std::make_shared<const LinearModel>(json_vec(j.at("weights")));
  if (type == "gp") return gp_mean_wrapper(json_gp(j.at("gp")));
  throw SchemaError("model file: unknown predictor type '" + type + "'");
}

ojson surrogate_json(const LevelSurrogate& s) {
  return {{"input", standardizer_json(s.input)}, {"target_offset", s.target_offset}, {"predictor", predictor_json(*s.predictor)}};
}

LevelSurrogate json_surrogate(const json& j) {
  return {json_standardizer(j.at("input")), j.at("target_offset").get<double>(), json_predictor(j.at("predictor"))};
}

}  // namespace

nlohmann::ordered_json model_to_json(const MFModel& model) {
  ojson j;
  j["format"] = "mfgp-model";
  j["version"] = kModelFormatVersion;
  j["estimator"] = to_string(model.kind());
  j["input_dim"] = model.input_dim();
  if (const auto* m = dynamic_cast<const ProposedModel*>(&model)) {
    auto& lowfi = j["lowfi"] = ojson::array();
    for (const auto& s : m->lowfi()) lowfi.push_back(surrogate_json(s));
    j["top_input"] = standardizer_json(m->top_input());
    j["target_offset"] = m->target_offset();
    j["top"] = gp_json(m->top());
  } else if (const auto* m = dynamic_cast<const KohModel*>(&model)) {
    j["base"] = surrogate_json(m->base());
    auto& levels = j["levels"] = ojson::array();
    for (const auto& l : m->levels())
      levels.push_back({{"rho", l.rho},
                        {"input", standardizer_json(l.input)},
                        {"target_offset", l.target_offset},
                        {"lowfi_offset", l.lowfi_offset},
                        {"delta", gp_json(l.delta)}});
  } else if (const auto* m = dynamic_cast<const NargpModel*>(&model)) {
    j["base"] = surrogate_json(m->base());
    auto& levels = j["levels"] = ojson::array();
    for (const auto& l : m->levels())
      levels.push_back({{"input", standardizer_json(l.input)}, {"target_offset", l.target_offset}, {"gp", gp_json(l.gp)}});
  } else if (const auto* m = dynamic_cast<const KrigingModel*>(&model)) {
    j["input"] = standardizer_json(m->input());
    j["target_offset"] = m->target_offset();
    j["gp"] = gp_json(m->gp());
  } else if (const auto* m = dynamic_cast<const CokrigingModel*>(&model)) {
    const auto& hp = m->hyperparams();
    j["input"] = standardizer_json(m->input());
    auto& feats = j["features"] = ojson::array();
    for (const auto& f : m->features()) feats.push_back(mat_json(f));
    auto& targs = j["targets"] = ojson::array();
    for (const auto& t : m->targets()) targs.push_back(vec_json(t));
    auto& ls = j["lengthscales"] = ojson::array();
    for (const auto& l : hp.lengthscales) ls.push_back(vec_json(l));
    j["loadings"] = mat_json(hp.loadings);
    j["diagonals"] = mat_json(hp.diagonals);
    j["noise_std"] = vec_json(hp.noise_std);
    j["means"] = vec_json(hp.means);
  } else {
    throw SchemaError("cannot serialize this model type");
  }
  return j;
}

std::unique_ptr<MFModel> model_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "mfgp-model") throw SchemaError("not an mfgp model file");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw SchemaError("unsupported model file version " + std::to_string(version));
    EstimatorKind kind;
    try {
      kind = estimator_kind_from_string(j.at("estimator").get<std::string>());
    } catch (const ConfigurationError& e) {
      throw SchemaError(std::string("model file: ") + e.what());
    }
    const auto d = j.at("input_dim").get<std::size_t>();
    std::unique_ptr<MFModel> model;
    switch (kind) {
      case EstimatorKind::Proposed: {
        std::vector<LevelSurrogate> lowfi;
        for (const auto& s : j.at("lowfi")) lowfi.push_back(json_surrogate(s));
        model = std::make_unique<ProposedModel>(d, std::move(lowfi), json_standardizer(j.at("top_input")),
                                                j.at("target_offset").get<double>(), json_gp(j.at("top")));
        break;
      }
      case EstimatorKind::Koh: {
        std::vector<KohLevel> levels;
        for (const auto& l : j.at("levels"))
          levels.push_back({l.at("rho").get<double>(), json_standardizer(l.at("input")), l.at("target_offset").get<double>(),
                            l.at("lowfi_offset").get<double>(), json_gp(l.at("delta"))});
        if (levels.empty()) throw SchemaError("KOH model has no levels");
        model = std::make_unique<KohModel>(json_surrogate(j.at("base")), std::move(levels));
        break;
      }
      case EstimatorKind::Nargp: {
        std::vector<NargpLevel> levels;
        for (const auto& l : j.at("levels"))
          levels.push_back({json_standardizer(l.at("input")), l.at("target_offset").get<double>(), json_gp(l.at("gp"))});
        if (levels.empty()) throw SchemaError("NARGP model has no levels");
        model = std::make_unique<NargpModel>(json_surrogate(j.at("base")), std::move(levels));
        break;
      }
      case EstimatorKind::Kriging:
        model = std::make_unique<KrigingModel>(json_standardizer(j.at("input")), j.at("target_offset").get<double>(),
                                               json_gp(j.at("gp")));
        break;
      case EstimatorKind::Cokriging: {
        std::vector<Matrix> feats;
        for (const auto& f : j.at("features")) feats.push_back(json_mat(f));
        std::vector<Vector> targs;
        for (const auto& t : j.at("targets")) targs.push_back(json_vec(t));
        CokrigingHyperparams hp;
        for (const auto& l : j.at("lengthscales")) hp.lengthscales.push_back(json_vec(l));
        hp.loadings = json_mat(j.at("loadings"));
        hp.diagonals = json_mat(j.at("diagonals"));
        hp.noise_std = json_vec(j.at("noise_std"));
        hp.means = json_vec(j.at("means"));
        model = std::make_unique<CokrigingModel>(json_standardizer(j.at("input")), std::move(feats), std::move(targs),
                                                 std::move(hp));
        break;
      }
    }
    if (model->input_dim() != d) throw SchemaError("model file: stored input_dim disagrees with the model");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("model file: ") + e.what());
  }
}

void save_model(const MFModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << model_to_json(model).dump(1) << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

std::unique_ptr<MFModel> load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open model file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace mfgp
