#include "wsnloc/preprocess.hpp"

#include <cmath>

namespace wsnloc {

ProcessedFeatures::SliceView ProcessedFeatures::slice(int t) const {
  if (t < 0 || t >= tensor_.steps()) throw std::out_of_range("slice index out of range");
  const Eigen::Index steps = tensor_.steps();
  return SliceView(tensor_.values().data() + t, tensor_.nodes(), tensor_.width(),
                   Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(tensor_.width() * steps, steps));
}

FeatureTensor impute_mean(const FeatureTensor& raw) {
  FeatureTensor out = raw;
  const int steps = raw.steps();
  for (int i = 0; i < raw.nodes(); ++i) {
    for (int k = 0; k < raw.width(); ++k) {
      double sum = 0.0;
      int observed = 0;
      for (int t = 0; t < steps; ++t) {
        if (!raw.missing(i, k, t)) {
          sum += raw.at(i, k, t);
          ++observed;
        }
      }
      const double fill = observed > 0 ? sum / observed : 0.0;
      for (int t = 0; t < steps; ++t) {
        if (raw.missing(i, k, t)) {
          out.at(i, k, t) = fill;
          out.set_missing(i, k, t, false);
        }
      }
    }
  }
  return out;
}

Normalized zscore_normalize(const FeatureTensor& imputed) {
  const int n = imputed.nodes();
  const int width = imputed.width();
  const int steps = imputed.steps();
  const double count = static_cast<double>(n) * steps;
  Normalized r;
  r.stats.mean.assign(static_cast<std::size_t>(width), 0.0);
  r.stats.stddev.assign(static_cast<std::size_t>(width), 0.0);
  FeatureTensor out(n, width, steps);
  for (int k = 0; k < width; ++k) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t < steps; ++t) sum += imputed.at(i, k, t);
    }
    const double mu = sum / count;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t < steps; ++t) {
        const double d = imputed.at(i, k, t) - mu;
        sq += d * d;
      }
    }
    const double sd = std::sqrt(sq / count);
    r.stats.mean[k] = mu;
    r.stats.stddev[k] = sd;
    if (sd < kDegenerateStddev) continue;
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t < steps; ++t) out.at(i, k, t) = (imputed.at(i, k, t) - mu) / sd;
    }
  }
  r.features = ProcessedFeatures(std::move(out));
  return r;
}

std::vector<Matrix> slice_timesteps(const ProcessedFeatures& processed) {
  std::vector<Matrix> slices;
  slices.reserve(static_cast<std::size_t>(processed.steps()));
  for (int t = 0; t < processed.steps(); ++t) slices.emplace_back(processed.slice(t));
  return slices;
}

Normalized preprocess(const FeatureTensor& raw) { return zscore_normalize(impute_mean(raw)); }

}  // namespace wsnloc
