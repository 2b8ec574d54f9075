#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wsnloc/config.hpp"
#include "wsnloc/evaluation.hpp"

namespace wsnloc {

enum class SweepParam { Noise, Nodes, Kappa, Window, RadioRange, Anchors };

/// Accepts noise | nodes | kappa | twindow | dth | alpha.
SweepParam parse_sweep_param(std::string_view name);
std::string to_string(SweepParam p);

/// Writes `value` into the SimConfig field the parameter controls.
void apply_sweep_value(SimConfig& sim, SweepParam p, double value);

/// True when `value` lies inside the range studied for the parameter.
bool in_studied_range(SweepParam p, double value);

struct SweepSpec {
  SweepParam param = SweepParam::Noise;
  std::vector<double> values;
  std::vector<ModelKind> models;
  std::vector<std::uint64_t> seeds;
  ExperimentConfig base;

  void validate() const;
};

/// One trained-and-evaluated configuration.
struct PointResult {
  MetricsTable test;
  std::vector<EpochRecord> history;
};

/// Builds the dataset for `cfg` at `seed`, splits it by topology, trains
/// `model` on the training side and evaluates on the held-out side.
PointResult run_point(const ExperimentConfig& cfg, ModelKind model, std::uint64_t seed);

struct SweepRow {
  bool aggregate = false;
  ModelKind model = ModelKind::UBiGTLoc;
  double value = 0.0;
  std::optional<std::uint64_t> seed;  // empty on aggregate rows
  MeanStd masked_mse;
  MeanStd mean_error;
  bool extrapolated = false;
  std::string status = "ok";
};

/// Run rows ordered by (model, value, seed) in SweepSpec order, then one
/// aggregate row per (model, value) over the seeds that succeeded.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

void write_sweep_csv(const std::string& path, SweepParam param, const std::vector<SweepRow>& rows);

}  // namespace wsnloc
