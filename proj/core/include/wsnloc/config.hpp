#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "wsnloc/net_sim.hpp"
#include "wsnloc/training.hpp"

namespace wsnloc {

/// Simulation and training settings read from one flat JSON object. Keys are
/// the field names of SimConfig and TrainConfig; `seed` sets both.
struct ExperimentConfig {
  SimConfig sim;
  TrainConfig train;

  void validate() const;
  nlohmann::json to_json() const;
};

/// Overlays the keys of `j` on `base`. Unknown keys and type mismatches
/// throw ConfigError naming the key.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const ExperimentConfig& base = {});
ExperimentConfig load_experiment_config(const std::string& path,
                                        const ExperimentConfig& base = {});

}  // namespace wsnloc
