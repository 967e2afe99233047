#pragma once

#include <filesystem>

#include "driftids/idsmodel/model.hpp"
#include "json.hpp"

namespace driftids::idsmodel {

// Checkpoint container (JSON):
//   {"format": "drift-ids-checkpoint", "version": 1,
//    "config": {...ModelConfig...},
//    "params": [{"name", "shape": [rows, cols], "values": [row-major float64]}...],
//    "adam": {"step", "beta1", "beta2", "epsilon", "first_moment": [...], "second_moment": [...]},
//    "strategy": optional object written by the owning strategy}
// Doubles are written with 17 significant digits and read back bit-exactly.
nlohmann::json model_to_json(const ModelState& model);
ModelState model_from_json(const nlohmann::json& j);

nlohmann::json tensors_to_json(const numgrad::ParamSet& tensors);
nlohmann::json tensors_to_json(const numgrad::GradSet& tensors);
numgrad::ParamSet params_from_json(const nlohmann::json& j);
numgrad::GradSet grads_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const ModelConfig& c);
ModelConfig config_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const ModelState& model,
                     const nlohmann::json& strategy_state = nullptr);
ModelState load_checkpoint(const std::filesystem::path& path, nlohmann::json* strategy_state = nullptr);

}  // namespace driftids::idsmodel
