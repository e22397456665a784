#include "clir/neural/checkpoint.hpp"

#include <fstream>

#include "clir/error.hpp"

namespace clir::nn {

namespace {

ModelFamily parse_family(const std::string& s) {
  if (s == "MP") return ModelFamily::kMatchPyramid;
  if (s == "DRMM") return ModelFamily::kDrmm;
  if (s == "KNRM") return ModelFamily::kKnrm;
  throw Error("unknown model family " + s);
}

}  // namespace

nlohmann::json to_json(const ModelConfig& c) {
  return {{"name", c.name},
          {"family", std::string(to_string(c.family))},
          {"interaction", std::string(to_string(c.interaction))},
          {"hybrid", c.hybrid},
          {"translate_query", c.translate_query},
          {"eta", c.eta},
          {"conv_kernel_size", c.conv_kernel_size},
          {"conv_channels", c.conv_channels},
          {"pool_rows", c.pool_rows},
          {"pool_cols", c.pool_cols},
          {"histogram_bins", c.histogram_bins},
          {"kernel_count", c.kernel_count},
          {"kernel_sigma", c.kernel_sigma},
          {"mlp_widths", c.mlp_widths},
          {"drmm_hidden", c.drmm_hidden},
          {"query_max_len", c.query_max_len},
          {"seed", c.seed}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.name = j.at("name").get<std::string>();
  c.family = parse_family(j.at("family").get<std::string>());
  c.interaction = parse_interaction_kind(j.at("interaction").get<std::string>());
  c.hybrid = j.at("hybrid").get<bool>();
  c.translate_query = j.at("translate_query").get<bool>();
  c.eta = j.at("eta").get<double>();
  c.conv_kernel_size = j.at("conv_kernel_size").get<std::size_t>();
  c.conv_channels = j.at("conv_channels").get<std::size_t>();
  c.pool_rows = j.at("pool_rows").get<std::size_t>();
  c.pool_cols = j.at("pool_cols").get<std::size_t>();
  c.histogram_bins = j.at("histogram_bins").get<std::size_t>();
  c.kernel_count = j.at("kernel_count").get<std::size_t>();
  c.kernel_sigma = j.at("kernel_sigma").get<double>();
  c.mlp_widths = j.at("mlp_widths").get<std::vector<std::size_t>>();
  c.drmm_hidden = j.at("drmm_hidden").get<std::size_t>();
  c.query_max_len = j.at("query_max_len").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
          {"neg_per_pos", c.neg_per_pos},     {"max_epochs", c.max_epochs},
          {"margin", c.margin},               {"beta1", c.beta1},
          {"beta2", c.beta2},                 {"epsilon", c.epsilon},
          {"seed", c.seed},                   {"track_train_map", c.track_train_map}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.neg_per_pos = j.at("neg_per_pos").get<std::size_t>();
  c.max_epochs = j.at("max_epochs").get<std::size_t>();
  c.margin = j.at("margin").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.track_train_map = j.at("track_train_map").get<bool>();
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const RankingModel& model, const TrainConfig& train_config) {
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& [name, t] : model.params()) {
    tensors.push_back({{"name", name}, {"shape", t.shape}, {"values", t.value}});
  }
  nlohmann::json doc = {{"format", "clir-checkpoint"},
                        {"version", kCheckpointVersion},
                        {"model_config", to_json(model.config())},
                        {"train_config", to_json(train_config)},
                        {"tensors", std::move(tensors)}};
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("checkpoint " + path.string() + ": " + e.what());
  }
  if (doc.value("format", "") != "clir-checkpoint") throw Error("not a checkpoint: " + path.string());
  if (doc.at("version").get<int>() != kCheckpointVersion) throw Error("unsupported checkpoint version");
  Checkpoint cp{RankingModel(model_config_from_json(doc.at("model_config"))),
                train_config_from_json(doc.at("train_config"))};
  const auto& tensors = doc.at("tensors");
  if (tensors.size() != cp.model.params().size()) throw Error("checkpoint tensor count mismatch: " + path.string());
  for (const auto& entry : tensors) {
    const auto name = entry.at("name").get<std::string>();
    Tensor& t = cp.model.params().get(name);
    if (entry.at("shape").get<std::vector<std::size_t>>() != t.shape) throw Error("checkpoint shape mismatch: " + name);
    auto values = entry.at("values").get<std::vector<double>>();
    if (values.size() != t.size()) throw Error("checkpoint size mismatch: " + name);
    t.value = std::move(values);
  }
  return cp;
}

}  // namespace clir::nn
