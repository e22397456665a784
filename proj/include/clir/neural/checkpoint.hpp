#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "clir/neural/model.hpp"
#include "clir/neural/train.hpp"

namespace clir::nn {

inline constexpr int kCheckpointVersion = 1;

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct Checkpoint {
  RankingModel model;
  TrainConfig train_config;
};

/// JSON document with format tag, version, both configs and every named
/// tensor. Doubles are written in shortest round-trip form, so load(save(x))
/// reproduces every parameter bit for bit.
void save_checkpoint(const std::filesystem::path& path, const RankingModel& model, const TrainConfig& train_config);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace clir::nn
