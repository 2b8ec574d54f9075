#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "wsnloc/model.hpp"
#include "wsnloc/net_sim.hpp"
#include "wsnloc/preprocess.hpp"

namespace wsnloc {

/// One simulated graph as stored on disk: raw features plus ground truth.
struct GraphSample {
  int topology_id = 0;
  int draw_id = 0;
  std::vector<Point> positions;
  std::vector<bool> anchor_flags;
  std::vector<std::pair<int, int>> edges;  // i < j
  FeatureTensor features;                  // raw, with missing mask
  SimConfig config;
  std::vector<int> unreachable;            // nodes without a route to the central unit

  int node_count() const { return static_cast<int>(positions.size()); }
};

nlohmann::json to_json(const SimConfig& cfg);
SimConfig sim_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GraphSample& sample);
GraphSample graph_sample_from_json(const nlohmann::json& j);

/// `n_topologies` fixed layouts, each with `draws` independent channel
/// realizations. Deterministic in (cfg, seed).
std::vector<GraphSample> build_dataset(const SimConfig& cfg, int n_topologies, int draws,
                                       std::uint64_t seed);

void write_dataset(std::ostream& out, std::span<const GraphSample> samples);
void write_dataset(const std::string& path, std::span<const GraphSample> samples);
std::vector<GraphSample> read_dataset(std::istream& in);
std::vector<GraphSample> read_dataset(const std::string& path);

/// A sample after imputation and normalization, ready for the model.
struct TrainingSample {
  int topology_id = 0;
  int draw_id = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<bool> anchor_flags;
  NormalizationStats stats;
  ModelInput input;
};

TrainingSample prepare_sample(const GraphSample& sample);
std::vector<TrainingSample> prepare_samples(std::span<const GraphSample> samples);

struct AugmentConfig {
  double probability = 0.5;           // per augmentation, independently
  double edge_removal_fraction = 0.10;
  double feature_noise_std = 0.1;
};

/// Structure-oriented edge removal and feature-oriented RSSI noise, each
/// applied with the configured probability. Labels and anchor mask are
/// never touched; coordinate columns are never perturbed.
TrainingSample augment(const TrainingSample& sample, const AugmentConfig& cfg, Rng& rng);

}  // namespace wsnloc
