#include "wsnloc/net_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace wsnloc {

Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed),
                                   static_cast<std::uint32_t>(seed >> 32)};
  for (std::uint64_t s : stream) {
    words.push_back(static_cast<std::uint32_t>(s));
    words.push_back(static_cast<std::uint32_t>(s >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

void SimConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("SimConfig: " + msg); };
  if (!(field_side > 0.0)) fail("field_side must be > 0");
  if (node_count < 2) fail("node_count must be >= 2");
  if (!(anchor_fraction >= 0.0 && anchor_fraction <= 1.0)) fail("anchor_fraction must be in [0,1]");
  if (!(radio_range > 0.0)) fail("radio_range must be > 0");
  if (window < 1) fail("window must be >= 1");
  if (!(noise_variance >= 0.0)) fail("noise_variance must be >= 0");
  if (!(interference_scale >= 0.0 && interference_scale <= 1.0)) {
    fail("interference_scale must be in [0,1]");
  }
  if (!(ref_distance > 0.0)) fail("ref_distance must be > 0");
  if (!(min_distance > 0.0)) fail("min_distance must be > 0");
  if (!(miss_probability >= 0.0 && miss_probability < 1.0)) {
    fail("miss_probability must be in [0,1)");
  }
  if (anchor_count() >= node_count) fail("anchor_fraction leaves no regular nodes");
}

int SimConfig::anchor_count() const {
  return static_cast<int>(std::lround(anchor_fraction * node_count));
}

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

AdjacencyMatrix::AdjacencyMatrix(int n)
    : n_(n), bits_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0) {}

void AdjacencyMatrix::set(int i, int j, bool connected) {
  if (i == j) return;
  bits_[static_cast<std::size_t>(i) * n_ + j] = connected ? 1 : 0;
  bits_[static_cast<std::size_t>(j) * n_ + i] = connected ? 1 : 0;
}

int AdjacencyMatrix::degree(int i) const {
  int d = 0;
  for (int j = 0; j < n_; ++j) d += (*this)(i, j) ? 1 : 0;
  return d;
}

std::vector<std::pair<int, int>> AdjacencyMatrix::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) {
      if ((*this)(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

NeighborLists AdjacencyMatrix::neighbor_lists() const {
  NeighborLists nl;
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if ((*this)(i, j)) nl.cols.push_back(j);
    }
    nl.offsets.push_back(static_cast<int>(nl.cols.size()));
  }
  return nl;
}

AdjacencyMatrix AdjacencyMatrix::from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  AdjacencyMatrix a(n);
  for (const auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n || i == j) {
      throw std::invalid_argument("invalid edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
    a.set(i, j, true);
  }
  return a;
}

FeatureTensor::FeatureTensor(int nodes, int width, int steps)
    : nodes_(nodes),
      width_(width),
      steps_(steps),
      values_(static_cast<std::size_t>(nodes) * width * steps, 0.0),
      missing_(values_.size(), 0) {}

NetworkTopology generate_topology(const SimConfig& cfg) {
  Rng rng = make_rng(cfg.seed, {0x70706f6cULL});
  return generate_topology(cfg, rng);
}

NetworkTopology generate_topology(const SimConfig& cfg, Rng& rng) {
  cfg.validate();
  const int n = cfg.node_count;
  NetworkTopology topo;
  topo.field_side = cfg.field_side;
  topo.central_unit = {cfg.field_side / 2.0, cfg.field_side / 2.0};
  std::uniform_real_distribution<double> coord(0.0, cfg.field_side);
  topo.positions.resize(static_cast<std::size_t>(n));
  for (auto& p : topo.positions) {
    p.x = coord(rng);
    p.y = coord(rng);
  }
  topo.anchor_count = cfg.anchor_count();
  topo.regular_count = n - topo.anchor_count;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  topo.anchor_flags.assign(static_cast<std::size_t>(n), false);
  for (int a = 0; a < topo.anchor_count; ++a) topo.anchor_flags[order[a]] = true;
  return topo;
}

AdjacencyMatrix compute_adjacency(const NetworkTopology& topo, double radio_range) {
  const int n = topo.node_count();
  AdjacencyMatrix a(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (distance(topo.positions[i], topo.positions[j]) <= radio_range) a.set(i, j, true);
    }
  }
  return a;
}

double interference_sigma(double kappa, int node_count) {
  return kappa * std::sqrt(static_cast<double>(node_count));
}

double sample_rssi(const SimConfig& cfg, double distance_m, Rng& rng) {
  if (!(distance_m >= 0.0)) {
    throw std::invalid_argument("sample_rssi: distance must be non-negative and finite");
  }
  const double d = std::max(distance_m, cfg.min_distance);
  double rssi = cfg.ref_rssi - 10.0 * cfg.path_loss_exponent * std::log10(d / cfg.ref_distance);
  const double shadow_sd = std::sqrt(cfg.noise_variance);
  if (shadow_sd > 0.0) rssi -= std::normal_distribution<double>(0.0, shadow_sd)(rng);
  const double interference_sd = interference_sigma(cfg.interference_scale, cfg.node_count);
  if (interference_sd > 0.0) rssi -= std::normal_distribution<double>(0.0, interference_sd)(rng);
  return rssi;
}

FeatureTensor acquire_features(const NetworkTopology& topo, const AdjacencyMatrix& adjacency,
                               const SimConfig& cfg, Rng& rng) {
  const int n = topo.node_count();
  if (adjacency.node_count() != n) {
    throw ShapeError("acquire_features: adjacency size does not match topology");
  }
  const int steps = cfg.window;
  FeatureTensor f(n, n + 2, steps);
  const bool anchors_present = cfg.anchor_fraction > 0.0 && topo.anchor_count > 0;
  std::bernoulli_distribution drop(cfg.miss_probability);
  for (int t = 0; t < steps; ++t) {
    for (int i = 0; i < n; ++i) {
      if (anchors_present && topo.anchor_flags[i]) {
        f.at(i, n, t) = topo.positions[i].x;
        f.at(i, n + 1, t) = topo.positions[i].y;
        continue;
      }
      for (int j = 0; j < n; ++j) {
        if (!adjacency(i, j)) continue;
        const double rssi = sample_rssi(cfg, distance(topo.positions[i], topo.positions[j]), rng);
        if (cfg.miss_probability > 0.0 && drop(rng)) {
          f.set_missing(i, j, t, true);
        } else {
          f.at(i, j, t) = rssi;
        }
      }
    }
  }
  return f;
}

ComplexityReport route_and_count(const NetworkTopology& topo, const AdjacencyMatrix& adjacency,
                                 const SimConfig& cfg) {
  const int n = topo.node_count();
  ComplexityReport r;
  r.anchor_based = topo.anchor_count > 0;
  r.neighbor_counts.resize(static_cast<std::size_t>(n));
  r.hop_level.assign(static_cast<std::size_t>(n), -1);
  r.parent.assign(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) r.neighbor_counts[i] = adjacency.degree(i);

  // Breadth-first levels from the central unit; each node adopts the lowest
  // indexed neighbor on the previous level as its parent.
  std::vector<int> frontier;
  for (int i = 0; i < n; ++i) {
    if (distance(topo.positions[i], topo.central_unit) <= cfg.radio_range) {
      r.hop_level[i] = 1;
      frontier.push_back(i);
    }
  }
  std::vector<int> order = frontier;
  for (int level = 2; !frontier.empty(); ++level) {
    std::vector<int> next;
    for (int i = 0; i < n; ++i) {
      if (r.hop_level[i] != -1) continue;
      for (int p : frontier) {  // frontier is ascending
        if (adjacency(i, p)) {
          r.hop_level[i] = level;
          r.parent[i] = p;
          next.push_back(i);
          break;
        }
      }
    }
    order.insert(order.end(), next.begin(), next.end());
    frontier = std::move(next);
  }

  std::vector<int> subtree(static_cast<std::size_t>(n), 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    subtree[*it] += 1;
    if (r.parent[*it] >= 0) subtree[r.parent[*it]] += subtree[*it];
  }

  r.forward_counts.resize(static_cast<std::size_t>(n));
  r.per_node_cost.resize(static_cast<std::size_t>(n));
  const long steps = cfg.window;
  for (int i = 0; i < n; ++i) {
    if (r.hop_level[i] == -1) {
      r.unreachable.push_back(i);
      continue;
    }
    const int h = subtree[i];
    r.forward_counts[i] = h;
    const bool anchor = r.anchor_based && topo.anchor_flags[i];
    const long cost = anchor ? steps + h : steps * r.neighbor_counts[i] + h;
    r.per_node_cost[i] = cost;
    r.total_cost += cost;
  }
  return r;
}

}  // namespace wsnloc
