#pragma once

#include <vector>

#include "wsnloc/config.hpp"

namespace wsnloc {

/// The tiny end-to-end setting: N=6, T=3, H1=H2=4, two heads, two graphs
/// per batch, train mode with dropout.
ExperimentConfig gradcheck_defaults();

struct ModelGradCheck {
  ModelKind model = ModelKind::UBiGTLoc;
  std::size_t coordinates = 0;
  GradCheckResult result;
};

/// Analytic gradients of the batch loss against fourth-order central
/// differences for every model kind, every parameter coordinate.
std::vector<ModelGradCheck> run_gradcheck(const ExperimentConfig& cfg, double step = 1e-4,
                                          double floor = 1e-6);

}  // namespace wsnloc
