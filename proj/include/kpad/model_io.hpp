#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "kpad/classifiers.hpp"

namespace kpad {

/// Model file layout:
///   { model_kind, hyperparameters, parameters, normalizer, feature_dim, created_with_config_hash }
/// Numbers are written in shortest round-trip form, so reloading is lossless.
nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const nlohmann::json& j, ModelKind kind);

nlohmann::json normalizer_to_json(const Normalizer& norm);
Normalizer normalizer_from_json(const nlohmann::json& j);

/// 64-bit FNV-1a over the canonical hyperparameter JSON, as 16 hex digits.
std::string config_hash(const ModelConfig& config);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace kpad
