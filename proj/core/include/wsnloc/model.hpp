#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wsnloc/global_synthesis.hpp"
#include "wsnloc/numcore.hpp"

namespace wsnloc {

enum class ModelKind { UBiGTLoc, Baseline1, Baseline2 };

std::string to_string(ModelKind kind);
/// Accepts ubigtloc | baseline1 | baseline2.
ModelKind parse_model_kind(std::string_view name);

struct ModelConfig {
  ModelKind kind = ModelKind::UBiGTLoc;
  int node_count = 100;     // N; the input width is N + 2
  int window = 10;          // T
  int temporal_hidden = 500;
  int spatial_hidden = 500;
  int heads = 4;
  double dropout = 0.5;
  bool dropout_after_layer2 = true;
  double ewma_decay = 0.6;
  double field_side = 100.0;
  double bn_epsilon = 1e-5;
  double bn_momentum = 0.1;

  Index feature_width() const { return node_count + 2; }
  /// Width of the encoding entering the first attention layer.
  Index encoding_width() const;
  void validate() const;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

/// Everything the network consumes for one graph.
struct ModelInput {
  std::vector<Matrix> slices;  // T normalized slices, each N x (N+2)
  NeighborLists neighbors;
  Matrix truth;                // N x 2, meters
  std::vector<bool> regular;   // loss mask
};

struct BatchOutput {
  std::vector<Matrix> predictions;  // meters
  std::vector<double> losses;       // masked MSE per sample, m^2
  double loss = 0.0;                // mean of `losses`
};

/// All learnable tensors with their checkpoint names, freshly initialized.
ParameterSet initialize_parameters(const ModelConfig& cfg, std::uint64_t seed);

/// Forward pass over a mini-batch with batch normalization pooled across all
/// node rows of all graphs. When `grads` is non-null, the gradient of the
/// mean loss is added into it. In train mode `stats` receives the pooled
/// batch statistics; dropout masks derive from (dropout_seed, sample index).
BatchOutput run_batch(const ModelConfig& cfg, const ParameterSet& params,
                      std::span<const ModelInput* const> batch, Mode mode,
                      std::uint64_t dropout_seed, Gradients* grads = nullptr,
                      BatchStats* stats = nullptr);

/// Eval-mode prediction for a single graph.
Matrix predict(const ModelConfig& cfg, const ParameterSet& params, const ModelInput& input);

struct Checkpoint {
  ModelConfig model;
  ParameterSet params;
  nlohmann::json train_config = nlohmann::json::object();
};

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace wsnloc
