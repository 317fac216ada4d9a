#pragma once

// Trained models as version-tagged JSON text. Every matrix and coefficient is
// stored in decimal with round-trip precision; GPs are stored as training data
// plus hyperparameters and refactorized on load, which reproduces the saved
// model exactly.

#include "mfgp/estimators.hpp"

#include "json.hpp"

#include <filesystem>
#include <memory>

namespace mfgp {

inline constexpr int kModelFormatVersion = 1;

nlohmann::ordered_json model_to_json(const MFModel& model);
/// Throws SchemaError on an unknown format, version or estimator.
std::unique_ptr<MFModel> model_from_json(const nlohmann::json& j);

void save_model(const MFModel& model, const std::filesystem::path& path);
std::unique_ptr<MFModel> load_model(const std::filesystem::path& path);

}  // namespace mfgp
