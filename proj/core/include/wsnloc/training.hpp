#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wsnloc/dataset.hpp"
#include "wsnloc/model.hpp"

namespace wsnloc {

struct TrainConfig {
  ModelKind model = ModelKind::UBiGTLoc;
  int batch_size = 16;
  int epochs = 100;
  double learning_rate = 1e-3;
  double dropout = 0.5;
  double augmentation_probability = 0.5;
  double edge_removal_fraction = 0.10;
  double feature_noise_std = 0.1;
  int folds = 5;
  std::uint64_t seed = 0;

  // Architecture.
  int hidden_temporal = 500;
  int hidden_spatial = 500;
  int heads = 4;
  double ewma_decay = 0.6;
  bool dropout_after_layer2 = true;
  double bn_momentum = 0.1;

  // Model selection and data volume.
  bool cross_validate = true;
  std::vector<double> grid_learning_rates;  // empty: {learning_rate}
  std::vector<double> grid_dropouts;        // empty: {dropout}
  double train_fraction = 0.8;
  int topologies = 100;
  int draws_per_topology = 10;

  void validate() const;
  /// Architecture for graphs with `node_count` nodes and `window` slices.
  ModelConfig model_config(int node_count, int window, double field_side) const;
  AugmentConfig augment_config() const;

  nlohmann::json to_json() const;
};

/// Index pairs into a sample list.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> held_out;
};

/// Topology-disjoint split: `train_fraction` of the distinct topologies
/// (rounded) go to the training side.
Split split_train_test(std::span<const int> topology_ids, double train_fraction,
                       std::uint64_t seed);

/// k folds over distinct topologies; topology remainder is spread one per
/// fold from the first. Each Split holds (training folds, validation fold).
std::vector<Split> kfold_split(std::span<const int> topology_ids, int k, std::uint64_t seed);

struct EpochRecord {
  int epoch = 0;
  double mean_train_loss = 0.0;
  std::optional<double> mean_val_loss;
};

struct FitResult {
  ParameterSet params;
  std::vector<EpochRecord> history;
};

/// Mini-batch Adam on the masked MSE with per-epoch seeded shuffling,
/// augmentation and dropout. Validation losses are computed in eval mode
/// after every epoch when `validation` is non-empty. Throws
/// std::runtime_error on a non-finite loss after dumping parameter state
/// to stderr.
FitResult fit(const ModelConfig& model, ParameterSet params,
              std::span<const TrainingSample* const> train_set,
              std::span<const TrainingSample* const> validation, const TrainConfig& tc);

struct CvCandidate {
  double learning_rate = 0.0;
  double dropout = 0.0;
  double mean_val_loss = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochRecord> history;
  std::vector<CvCandidate> cv;  // empty when cross-validation is off
};

/// Cross-validated selection over the declared grid, then a final fit on
/// the whole training set with the chosen hyperparameters.
TrainResult train(std::span<const TrainingSample> train_set, const TrainConfig& tc,
                  double field_side);

/// CSV with columns epoch, mean_train_loss, mean_val_loss.
void write_history_csv(const std::string& path, std::span<const EpochRecord> history);

}  // namespace wsnloc
