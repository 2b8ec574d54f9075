#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wsnloc/dataset.hpp"
#include "wsnloc/model.hpp"

namespace wsnloc {

struct SampleMetrics {
  int topology_id = 0;
  int draw_id = 0;
  double masked_mse = 0.0;  // m^2
  double mean_error = 0.0;  // m
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};

MeanStd mean_std(std::span<const double> values);

struct MetricsTable {
  std::vector<SampleMetrics> samples;
  std::vector<double> node_errors;  // regular nodes only, sample by sample
  MeanStd masked_mse;
  MeanStd mean_error;
};

using Predictor = std::function<Matrix(const TrainingSample&)>;

/// Metrics of arbitrary predictions; used directly for oracle injection.
MetricsTable evaluate_predictions(std::span<const TrainingSample> samples, const Predictor& predict);

/// Eval-mode forward of the checkpoint over every sample.
MetricsTable evaluate(const Checkpoint& ckpt, std::span<const TrainingSample> samples);

/// Rows `sample,<topology>,<draw>,<mse>,<err>` followed by `mean` and `std`.
void write_metrics_csv(const std::string& path, const MetricsTable& table);

struct CdfSeries {
  std::vector<double> errors;         // nondecreasing, meters
  std::vector<double> probabilities;  // k/M, last exactly 1
};

/// Empirical CDF of a non-empty error list.
CdfSeries emit_cdf(std::span<const double> errors);

/// Smallest error whose cumulative probability reaches q, q in (0, 1].
double quantile(const CdfSeries& cdf, double q);

void write_cdf_csv(const std::string& path, const CdfSeries& cdf);

/// Shortest round-trip decimal text for a double.
std::string format_double(double v);

}  // namespace wsnloc
