#include "wsnloc/config.hpp"

#include <fstream>
#include <functional>
#include <map>

#include "wsnloc/dataset.hpp"

namespace wsnloc {

void ExperimentConfig::validate() const {
  sim.validate();
  train.validate();
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j = wsnloc::to_json(sim);
  const nlohmann::json t = train.to_json();
  for (const auto& [k, v] : t.items()) j[k] = v;
  return j;
}

namespace {

using Setter = std::function<void(ExperimentConfig&, const nlohmann::json&)>;

template <typename T>
Setter set(T SimConfig::*field) {
  return [field](ExperimentConfig& c, const nlohmann::json& v) { c.sim.*field = v.get<T>(); };
}

template <typename T>
Setter set(T TrainConfig::*field) {
  return [field](ExperimentConfig& c, const nlohmann::json& v) { c.train.*field = v.get<T>(); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"field_side", set(&SimConfig::field_side)},
      {"node_count", set(&SimConfig::node_count)},
      {"anchor_fraction", set(&SimConfig::anchor_fraction)},
      {"radio_range", set(&SimConfig::radio_range)},
      {"window", set(&SimConfig::window)},
      {"noise_variance", set(&SimConfig::noise_variance)},
      {"interference_scale", set(&SimConfig::interference_scale)},
      {"path_loss_exponent", set(&SimConfig::path_loss_exponent)},
      {"ref_rssi", set(&SimConfig::ref_rssi)},
      {"ref_distance", set(&SimConfig::ref_distance)},
      {"miss_probability", set(&SimConfig::miss_probability)},
      {"min_distance", set(&SimConfig::min_distance)},
      {"seed",
       [](ExperimentConfig& c, const nlohmann::json& v) {
         c.sim.seed = c.train.seed = v.get<std::uint64_t>();
       }},
      {"model",
       [](ExperimentConfig& c, const nlohmann::json& v) {
         c.train.model = parse_model_kind(v.get<std::string>());
       }},
      {"batch_size", set(&TrainConfig::batch_size)},
      {"epochs", set(&TrainConfig::epochs)},
      {"learning_rate", set(&TrainConfig::learning_rate)},
      {"dropout", set(&TrainConfig::dropout)},
      {"augmentation_probability", set(&TrainConfig::augmentation_probability)},
      {"edge_removal_fraction", set(&TrainConfig::edge_removal_fraction)},
      {"feature_noise_std", set(&TrainConfig::feature_noise_std)},
      {"folds", set(&TrainConfig::folds)},
      {"hidden_temporal", set(&TrainConfig::hidden_temporal)},
      {"hidden_spatial", set(&TrainConfig::hidden_spatial)},
      {"heads", set(&TrainConfig::heads)},
      {"ewma_decay", set(&TrainConfig::ewma_decay)},
      {"dropout_after_layer2", set(&TrainConfig::dropout_after_layer2)},
      {"bn_momentum", set(&TrainConfig::bn_momentum)},
      {"cross_validate", set(&TrainConfig::cross_validate)},
      {"grid_learning_rates", set(&TrainConfig::grid_learning_rates)},
      {"grid_dropouts", set(&TrainConfig::grid_dropouts)},
      {"train_fraction", set(&TrainConfig::train_fraction)},
      {"topologies", set(&TrainConfig::topologies)},
      {"draws_per_topology", set(&TrainConfig::draws_per_topology)},
  };
  return table;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const ExperimentConfig& base) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c = base;
  for (const auto& [key, value] : j.items()) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
    try {
      it->second(c, value);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path, const ExperimentConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return experiment_config_from_json(j, base);
}

}  // namespace wsnloc
