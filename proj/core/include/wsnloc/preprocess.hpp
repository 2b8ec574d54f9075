#pragma once

#include <vector>

#include "wsnloc/net_sim.hpp"
#include "wsnloc/numcore.hpp"

namespace wsnloc {

/// Per-feature statistics over all N*T entries of each feature column k.
struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // population standard deviation
};

/// Normalized tensor; slices are strided views onto the same storage.
class ProcessedFeatures {
 public:
  using SliceView = Eigen::Map<const Matrix, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;

  ProcessedFeatures() = default;
  explicit ProcessedFeatures(FeatureTensor tensor) : tensor_(std::move(tensor)) {}

  const FeatureTensor& tensor() const { return tensor_; }
  FeatureTensor& tensor() { return tensor_; }
  int steps() const { return tensor_.steps(); }

  /// F''_t as an N x (N+2) view, t in [0, T).
  SliceView slice(int t) const;

 private:
  FeatureTensor tensor_;
};

/// Standard deviations below this produce an all-zero normalized feature.
inline constexpr double kDegenerateStddev = 1e-12;

/// Replaces each missing entry with the mean of the observed entries in the
/// same (node, feature) series over time; all-missing series become 0.
/// The returned tensor has an all-clear missing mask.
FeatureTensor impute_mean(const FeatureTensor& raw);

struct Normalized {
  ProcessedFeatures features;
  NormalizationStats stats;
};

Normalized zscore_normalize(const FeatureTensor& imputed);

/// Copies every time slice out as a dense matrix, t = 0..T-1.
std::vector<Matrix> slice_timesteps(const ProcessedFeatures& processed);

/// impute_mean followed by zscore_normalize.
Normalized preprocess(const FeatureTensor& raw);

}  // namespace wsnloc
