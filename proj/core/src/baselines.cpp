#include "wsnloc/baselines.hpp"

#include <string>

namespace wsnloc {

void EwmaConfig::validate() const {
  if (!(decay > 0.0 && decay <= 1.0)) {
    throw ConfigError("ewma decay must be in (0, 1], got " + std::to_string(decay));
  }
}

Matrix snapshot_features(const ProcessedFeatures& processed) {
  if (processed.steps() < 1) throw std::invalid_argument("snapshot_features: no time steps");
  return processed.slice(processed.steps() - 1);
}

Matrix ewma_encode(std::span<const Matrix> slices, const EwmaConfig& cfg) {
  cfg.validate();
  if (slices.empty()) throw std::invalid_argument("ewma_encode: empty sequence");
  Matrix acc = slices.front();
  for (std::size_t t = 1; t < slices.size(); ++t) {
    expect_shape(slices[t], acc.rows(), acc.cols(), "ewma slice");
    acc = cfg.decay * slices[t] + (1.0 - cfg.decay) * acc;
  }
  return acc;
}

}  // namespace wsnloc
