#pragma once

#include <span>

#include "wsnloc/preprocess.hpp"

namespace wsnloc {

struct EwmaConfig {
  double decay = 0.6;  // weight of the newest slice

  void validate() const;
};

/// Last time slice F''_T.
Matrix snapshot_features(const ProcessedFeatures& processed);

/// E_1 = F''_1, E_t = decay * F''_t + (1 - decay) * E_{t-1}; returns E_T.
Matrix ewma_encode(std::span<const Matrix> slices, const EwmaConfig& cfg);

}  // namespace wsnloc
