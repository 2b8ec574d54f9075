#include "wsnloc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

namespace wsnloc {

nlohmann::json to_json(const SimConfig& c) {
  return {{"field_side", c.field_side},
          {"node_count", c.node_count},
          {"anchor_fraction", c.anchor_fraction},
          {"radio_range", c.radio_range},
          {"window", c.window},
          {"noise_variance", c.noise_variance},
          {"interference_scale", c.interference_scale},
          {"path_loss_exponent", c.path_loss_exponent},
          {"ref_rssi", c.ref_rssi},
          {"ref_distance", c.ref_distance},
          {"miss_probability", c.miss_probability},
          {"min_distance", c.min_distance},
          {"seed", c.seed}};
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
  SimConfig c;
  auto opt = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  opt("field_side", c.field_side);
  opt("node_count", c.node_count);
  opt("anchor_fraction", c.anchor_fraction);
  opt("radio_range", c.radio_range);
  opt("window", c.window);
  opt("noise_variance", c.noise_variance);
  opt("interference_scale", c.interference_scale);
  opt("path_loss_exponent", c.path_loss_exponent);
  opt("ref_rssi", c.ref_rssi);
  opt("ref_distance", c.ref_distance);
  opt("miss_probability", c.miss_probability);
  opt("min_distance", c.min_distance);
  opt("seed", c.seed);
  return c;
}

nlohmann::json to_json(const GraphSample& s) {
  nlohmann::json positions = nlohmann::json::array();
  for (const Point& p : s.positions) positions.push_back({p.x, p.y});
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [i, j] : s.edges) edges.push_back({i, j});
  std::vector<bool> missing;
  missing.reserve(s.features.size());
  for (std::uint8_t m : s.features.missing_mask()) missing.push_back(m != 0);
  return {{"topology_id", s.topology_id},
          {"draw_id", s.draw_id},
          {"positions", std::move(positions)},
          {"anchor_flags", s.anchor_flags},
          {"edges", std::move(edges)},
          {"dims", {s.features.nodes(), s.features.width(), s.features.steps()}},
          {"features", s.features.values()},
          {"missing", std::move(missing)},
          {"unreachable", s.unreachable},
          {"config", to_json(s.config)}};
}

GraphSample graph_sample_from_json(const nlohmann::json& j) {
  GraphSample s;
  s.topology_id = j.at("topology_id").get<int>();
  s.draw_id = j.value("draw_id", 0);
  for (const auto& p : j.at("positions")) s.positions.push_back({p.at(0), p.at(1)});
  s.anchor_flags = j.at("anchor_flags").get<std::vector<bool>>();
  for (const auto& e : j.at("edges")) s.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  s.config = sim_config_from_json(j.at("config"));
  const int n = s.node_count();
  const int steps = j.contains("dims") ? j.at("dims").at(2).get<int>() : s.config.window;
  s.features = FeatureTensor(n, n + 2, steps);
  const auto values = j.at("features").get<std::vector<double>>();
  const auto missing = j.at("missing").get<std::vector<bool>>();
  if (values.size() != s.features.size() || missing.size() != s.features.size() ||
      s.anchor_flags.size() != static_cast<std::size_t>(n)) {
    throw ShapeError("graph sample " + std::to_string(s.topology_id) + "/" +
                     std::to_string(s.draw_id) + ": array lengths do not match [N, N+2, T]");
  }
  std::copy(values.begin(), values.end(), s.features.values().begin());
  for (std::size_t i = 0; i < missing.size(); ++i) s.features.missing_mask()[i] = missing[i] ? 1 : 0;
  if (j.contains("unreachable")) s.unreachable = j.at("unreachable").get<std::vector<int>>();
  return s;
}

std::vector<GraphSample> build_dataset(const SimConfig& cfg, int n_topologies, int draws,
                                       std::uint64_t seed) {
  if (n_topologies < 1 || draws < 1) {
    throw std::invalid_argument("build_dataset: need at least one topology and one draw");
  }
  SimConfig echo = cfg;
  echo.seed = seed;
  echo.validate();
  std::vector<GraphSample> out;
  out.reserve(static_cast<std::size_t>(n_topologies) * draws);
  for (int k = 0; k < n_topologies; ++k) {
    Rng topo_rng = make_rng(seed, {1, static_cast<std::uint64_t>(k)});
    const NetworkTopology topo = generate_topology(echo, topo_rng);
    const AdjacencyMatrix adjacency = compute_adjacency(topo, echo.radio_range);
    const ComplexityReport routes = route_and_count(topo, adjacency, echo);
    if (!routes.unreachable.empty()) {
      std::clog << "warning: topology " << k << " has " << routes.unreachable.size()
                << " node(s) without a route to the central unit\n";
    }
    const auto edges = adjacency.edges();
    for (int d = 0; d < draws; ++d) {
      Rng draw_rng =
          make_rng(seed, {2, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(d)});
      GraphSample s;
      s.topology_id = k;
      s.draw_id = d;
      s.positions = topo.positions;
      s.anchor_flags = topo.anchor_flags;
      s.edges = edges;
      s.features = acquire_features(topo, adjacency, echo, draw_rng);
      s.config = echo;
      s.unreachable = routes.unreachable;
      out.push_back(std::move(s));
    }
  }
  return out;
}

void write_dataset(std::ostream& out, std::span<const GraphSample> samples) {
  for (const GraphSample& s : samples) out << to_json(s).dump() << '\n';
}

void write_dataset(const std::string& path, std::span<const GraphSample> samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset " + path);
  write_dataset(out, samples);
}

std::vector<GraphSample> read_dataset(std::istream& in) {
  std::vector<GraphSample> samples;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    samples.push_back(graph_sample_from_json(nlohmann::json::parse(line)));
  }
  return samples;
}

std::vector<GraphSample> read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read dataset " + path);
  return read_dataset(in);
}

TrainingSample prepare_sample(const GraphSample& g) {
  TrainingSample s;
  s.topology_id = g.topology_id;
  s.draw_id = g.draw_id;
  s.edges = g.edges;
  s.anchor_flags = g.anchor_flags;
  Normalized norm = preprocess(g.features);
  s.stats = std::move(norm.stats);
  s.input.slices = slice_timesteps(norm.features);
  s.input.neighbors = NeighborLists::from_edges(g.node_count(), g.edges);
  s.input.truth = Matrix(g.node_count(), 2);
  for (int i = 0; i < g.node_count(); ++i) {
    s.input.truth(i, 0) = g.positions[i].x;
    s.input.truth(i, 1) = g.positions[i].y;
  }
  s.input.regular.resize(g.anchor_flags.size());
  for (std::size_t i = 0; i < g.anchor_flags.size(); ++i) s.input.regular[i] = !g.anchor_flags[i];
  return s;
}

std::vector<TrainingSample> prepare_samples(std::span<const GraphSample> samples) {
  std::vector<TrainingSample> out;
  out.reserve(samples.size());
  for (const GraphSample& g : samples) out.push_back(prepare_sample(g));
  return out;
}

TrainingSample augment(const TrainingSample& sample, const AugmentConfig& cfg, Rng& rng) {
  std::bernoulli_distribution coin(cfg.probability);
  const bool remove_edges = coin(rng);
  const bool add_noise = coin(rng);
  if (!remove_edges && !add_noise) return sample;

  TrainingSample out = sample;
  const int n = static_cast<int>(out.anchor_flags.size());
  if (remove_edges && !out.edges.empty()) {
    const auto drop = static_cast<std::size_t>(
        std::lround(cfg.edge_removal_fraction * static_cast<double>(out.edges.size())));
    std::vector<std::size_t> order(out.edges.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> removed(out.edges.size(), false);
    for (std::size_t r = 0; r < drop; ++r) removed[order[r]] = true;

    // A removed link reads as "not measured": the normalized image of a raw 0.
    auto unmeasured = [&](int k) {
      const double sd = out.stats.stddev[k];
      return sd < kDegenerateStddev ? 0.0 : (0.0 - out.stats.mean[k]) / sd;
    };
    std::vector<std::pair<int, int>> kept;
    for (std::size_t e = 0; e < out.edges.size(); ++e) {
      const auto [i, j] = out.edges[e];
      if (!removed[e]) {
        kept.push_back(out.edges[e]);
        continue;
      }
      for (Matrix& slice : out.input.slices) {
        slice(i, j) = unmeasured(j);
        slice(j, i) = unmeasured(i);
      }
    }
    out.edges = std::move(kept);
    out.input.neighbors = NeighborLists::from_edges(n, out.edges);
  }
  if (add_noise) {
    std::normal_distribution<double> noise(0.0, cfg.feature_noise_std);
    const bool anchors_present =
        std::any_of(out.anchor_flags.begin(), out.anchor_flags.end(), [](bool a) { return a; });
    for (Matrix& slice : out.input.slices) {
      for (int i = 0; i < n; ++i) {
        if (anchors_present && out.anchor_flags[i]) continue;  // anchors measure no RSSI
        const NeighborLists& nb = out.input.neighbors;
        for (int p = nb.offsets[i]; p < nb.offsets[i + 1]; ++p) slice(i, nb.cols[p]) += noise(rng);
      }
    }
  }
  return out;
}

}  // namespace wsnloc
