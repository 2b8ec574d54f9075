#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "wsnloc/numcore.hpp"

namespace wsnloc {

using Rng = std::mt19937_64;

/// Independent, reproducible generator for a (seed, stream...) tuple.
Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {});

struct SimConfig {
  double field_side = 100.0;           // L, meters
  int node_count = 100;                // N
  double anchor_fraction = 0.2;        // alpha
  double radio_range = 20.0;           // d_th, meters
  int window = 10;                     // T, timestamps
  double noise_variance = 0.5;         // sigma^2, dB^2
  double interference_scale = 0.0;     // kappa
  double path_loss_exponent = 3.0;     // n
  double ref_rssi = -40.0;             // dBm at ref_distance
  double ref_distance = 1.0;           // d_o, meters
  double miss_probability = 0.02;      // per-measurement drop probability
  double min_distance = 0.1;           // log-term clamp, meters
  std::uint64_t seed = 0;

  /// Throws ConfigError on the first violated invariant.
  void validate() const;
  int anchor_count() const;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

struct NetworkTopology {
  double field_side = 0.0;
  std::vector<Point> positions;
  std::vector<bool> anchor_flags;
  int anchor_count = 0;
  int regular_count = 0;
  Point central_unit;

  int node_count() const { return static_cast<int>(positions.size()); }
};

/// Symmetric binary connectivity with zero diagonal.
class AdjacencyMatrix {
 public:
  explicit AdjacencyMatrix(int n = 0);

  int node_count() const { return n_; }
  bool operator()(int i, int j) const { return bits_[static_cast<std::size_t>(i) * n_ + j] != 0; }
  void set(int i, int j, bool connected);

  int degree(int i) const;
  /// Undirected edges (i, j) with i < j in lexicographic order.
  std::vector<std::pair<int, int>> edges() const;
  NeighborLists neighbor_lists() const;

  static AdjacencyMatrix from_edges(int n, const std::vector<std::pair<int, int>>& edges);

 private:
  int n_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// N x (N+2) x T array stored row-major as [node][feature][time].
class FeatureTensor {
 public:
  FeatureTensor() = default;
  FeatureTensor(int nodes, int width, int steps);

  int nodes() const { return nodes_; }
  int width() const { return width_; }
  int steps() const { return steps_; }
  std::size_t size() const { return values_.size(); }

  std::size_t offset(int i, int k, int t) const {
    return (static_cast<std::size_t>(i) * width_ + k) * steps_ + t;
  }
  double& at(int i, int k, int t) { return values_[offset(i, k, t)]; }
  double at(int i, int k, int t) const { return values_[offset(i, k, t)]; }
  bool missing(int i, int k, int t) const { return missing_[offset(i, k, t)] != 0; }
  void set_missing(int i, int k, int t, bool m) { missing_[offset(i, k, t)] = m ? 1 : 0; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<std::uint8_t>& missing_mask() { return missing_; }
  const std::vector<std::uint8_t>& missing_mask() const { return missing_; }

  bool operator==(const FeatureTensor&) const = default;

 private:
  int nodes_ = 0;
  int width_ = 0;
  int steps_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> missing_;
};

struct ComplexityReport {
  bool anchor_based = false;
  std::vector<int> neighbor_counts;                // N_n
  std::vector<int> hop_level;                      // 1 = direct to the central unit, -1 unreachable
  std::vector<int> parent;                         // -1 = central unit or unreachable
  std::vector<std::optional<int>> forward_counts;  // h_n, empty when unreachable
  std::vector<std::optional<long>> per_node_cost;  // C_n, empty when unreachable
  long total_cost = 0;                             // sum over reachable nodes
  std::vector<int> unreachable;
};

NetworkTopology generate_topology(const SimConfig& cfg);
/// Same as above but draws from an explicit generator.
NetworkTopology generate_topology(const SimConfig& cfg, Rng& rng);

AdjacencyMatrix compute_adjacency(const NetworkTopology& topo, double radio_range);

/// Density-dependent interference standard deviation kappa * sqrt(N).
double interference_sigma(double kappa, int node_count);

/// One log-normal shadowing draw with additive interference, in dBm.
double sample_rssi(const SimConfig& cfg, double distance_m, Rng& rng);

/// Runs the per-timestamp acquisition protocol and returns the raw tensor.
FeatureTensor acquire_features(const NetworkTopology& topo, const AdjacencyMatrix& adjacency,
                               const SimConfig& cfg, Rng& rng);

/// Min-hop forwarding tree to the central unit and the per-node cost model.
ComplexityReport route_and_count(const NetworkTopology& topo, const AdjacencyMatrix& adjacency,
                                 const SimConfig& cfg);

}  // namespace wsnloc
