#pragma once

// Reference implementations used as test oracles. They favor the most
// literal formulation over speed and share no code with the library.

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <vector>

#include "wsnloc/net_sim.hpp"
#include "wsnloc/spatial_attention.hpp"

namespace oracle {

using wsnloc::Index;
using wsnloc::Matrix;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Brute-force imputation: per (i,k) average of observed values over time.
inline std::vector<double> impute(const wsnloc::FeatureTensor& f) {
  std::vector<double> out(f.size());
  for (int i = 0; i < f.nodes(); ++i) {
    for (int k = 0; k < f.width(); ++k) {
      double sum = 0.0;
      int count = 0;
      for (int t = 0; t < f.steps(); ++t) {
        if (!f.missing(i, k, t)) {
          sum += f.at(i, k, t);
          ++count;
        }
      }
      const double fill = count > 0 ? sum / count : 0.0;
      for (int t = 0; t < f.steps(); ++t) {
        out[f.offset(i, k, t)] = f.missing(i, k, t) ? fill : f.at(i, k, t);
      }
    }
  }
  return out;
}

/// Brute-force z-score with population deviation in long double.
inline std::vector<double> zscore(const wsnloc::FeatureTensor& shape, const std::vector<double>& v) {
  std::vector<double> out(v.size());
  const int n = shape.nodes(), w = shape.width(), steps = shape.steps();
  for (int k = 0; k < w; ++k) {
    long double mean = 0.0L;
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < steps; ++t) mean += v[shape.offset(i, k, t)];
    mean /= static_cast<long double>(n) * steps;
    long double var = 0.0L;
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < steps; ++t) {
        const long double d = v[shape.offset(i, k, t)] - mean;
        var += d * d;
      }
    var /= static_cast<long double>(n) * steps;
    const long double sd = std::sqrt(var);
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < steps; ++t) {
        const std::size_t o = shape.offset(i, k, t);
        out[o] = sd < 1e-12L ? 0.0 : static_cast<double>((v[o] - mean) / sd);
      }
  }
  return out;
}

/// Dense multi-head attention layer: materializes Q, K, V and the full N x N
/// logit matrix, masks non-edges, and softmaxes row by row.
inline Matrix dense_transformer_conv(const Matrix& x, const std::vector<std::vector<bool>>& adj,
                                     const wsnloc::AttentionLayerWeights& w,
                                     std::vector<Matrix>* betas = nullptr) {
  const Index n = x.rows();
  const Index h = w.hidden();
  Matrix concat = Matrix::Zero(n, h * w.heads());
  for (int e = 0; e < w.heads(); ++e) {
    const Matrix q = x * w.query[e].transpose();
    const Matrix k = x * w.key[e].transpose();
    const Matrix v = x * w.value[e].transpose();
    Matrix beta = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      std::vector<double> logits(n, -std::numeric_limits<double>::infinity());
      double top = -std::numeric_limits<double>::infinity();
      for (Index j = 0; j < n; ++j) {
        if (!adj[i][j] || i == j) continue;
        double dot = 0.0;
        for (Index c = 0; c < h; ++c) dot += q(i, c) * k(j, c);
        logits[j] = dot / std::sqrt(static_cast<double>(h));
        top = std::max(top, logits[j]);
      }
      if (!std::isfinite(top)) continue;
      double z = 0.0;
      for (Index j = 0; j < n; ++j)
        if (std::isfinite(logits[j])) z += std::exp(logits[j] - top);
      for (Index j = 0; j < n; ++j)
        if (std::isfinite(logits[j])) beta(i, j) = std::exp(logits[j] - top) / z;
    }
    concat.middleCols(e * h, h) = beta * v;
    if (betas) betas->push_back(beta);
  }
  return x * w.skip.transpose() + concat * w.head_projection.transpose();
}

/// One LSTM step written gate by gate for scalar hidden and input sizes.
struct ScalarCell {
  double wf_h, wf_x, bf, wc_h, wc_x, bc, wi_h, wi_x, bi, wo_h, wo_x, bo;

  std::pair<double, double> step(double x, double h, double c) const {
    const double forget = sigmoid(wf_h * h + wf_x * x + bf);
    const double cand = std::tanh(wc_h * h + wc_x * x + bc);
    const double in = sigmoid(wi_h * h + wi_x * x + bi);
    const double cell = forget * c + in * cand;
    const double out = sigmoid(wo_h * h + wo_x * x + bo);
    return {out * std::tanh(cell), cell};
  }
};

struct RouteOracle {
  std::vector<int> hops;     // -1 unreachable
  std::vector<int> parent;   // -1 central unit or unreachable
  std::vector<int> forward;  // 1 + number of descendants, 0 if unreachable
};

/// Minimum-hop tree by repeated relaxation from the central unit, then
/// descendant counts by walking every node's ancestor chain.
inline RouteOracle route(const wsnloc::NetworkTopology& topo, const wsnloc::AdjacencyMatrix& adj,
                         double range) {
  const int n = topo.node_count();
  RouteOracle r;
  r.hops.assign(n, -1);
  r.parent.assign(n, -1);
  r.forward.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    if (wsnloc::distance(topo.positions[i], topo.central_unit) <= range) r.hops[i] = 1;
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (adj(i, j) && r.hops[j] > 0 && (r.hops[i] < 0 || r.hops[j] + 1 < r.hops[i])) {
          r.hops[i] = r.hops[j] + 1;
          changed = true;
        }
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (r.hops[i] <= 1) continue;
    for (int j = 0; j < n; ++j) {
      if (adj(i, j) && r.hops[j] == r.hops[i] - 1) {
        r.parent[i] = j;
        break;
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (r.hops[i] < 0) continue;
    for (int a = i; a >= 0; a = r.parent[a]) r.forward[a] += 1;
  }
  return r;
}

}  // namespace oracle
