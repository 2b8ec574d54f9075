#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "wsnloc/net_sim.hpp"

using namespace wsnloc;

namespace {

NetworkTopology place(std::vector<Point> pts, double side = 100.0) {
  NetworkTopology t;
  t.field_side = side;
  t.positions = std::move(pts);
  t.anchor_flags.assign(t.positions.size(), false);
  t.regular_count = static_cast<int>(t.positions.size());
  t.central_unit = {side / 2, side / 2};
  return t;
}

struct Moments {
  double mean = 0, var = 0;
};

Moments draw_moments(const SimConfig& cfg, double d, int count, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  double sum = 0, sq = 0;
  std::vector<double> xs(count);
  for (auto& x : xs) {
    x = sample_rssi(cfg, d, rng);
    sum += x;
  }
  const double mean = sum / count;
  for (double x : xs) sq += (x - mean) * (x - mean);
  return {mean, sq / (count - 1)};
}

}  // namespace

TEST_CASE("config validation") {
  SimConfig c;
  CHECK_NOTHROW(c.validate());
  c.node_count = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.anchor_fraction = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.interference_scale = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.miss_probability = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("generate_topology") {
  SimConfig c;
  c.node_count = 100;
  c.anchor_fraction = 0.2;
  c.seed = 7;
  const NetworkTopology t = generate_topology(c);
  CHECK(t.node_count() == 100);
  CHECK(t.anchor_count == 20);
  CHECK(t.regular_count == 80);
  CHECK(std::count(t.anchor_flags.begin(), t.anchor_flags.end(), true) == 20);
  for (const Point& p : t.positions) {
    CHECK(p.x >= 0.0);
    CHECK(p.x <= 100.0);
    CHECK(p.y >= 0.0);
    CHECK(p.y <= 100.0);
  }
  CHECK(t.central_unit.x == 50.0);

  const NetworkTopology again = generate_topology(c);
  for (int i = 0; i < 100; ++i) {
    CHECK(again.positions[i].x == t.positions[i].x);
    CHECK(again.anchor_flags[i] == t.anchor_flags[i]);
  }

  c.anchor_fraction = 0.0;
  const NetworkTopology free = generate_topology(c);
  CHECK(std::none_of(free.anchor_flags.begin(), free.anchor_flags.end(), [](bool a) { return a; }));
  CHECK(free.regular_count == 100);
}

TEST_CASE("compute_adjacency uses an inclusive threshold") {
  const auto t = place({{0, 0}, {20.0, 0}, {40.01, 0}});
  const AdjacencyMatrix a = compute_adjacency(t, 20.0);
  CHECK(a(0, 1));
  CHECK_FALSE(a(1, 2));
  CHECK_FALSE(a(0, 2));

  SimConfig c;
  c.node_count = 40;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    c.seed = seed;
    const AdjacencyMatrix r = compute_adjacency(generate_topology(c), 25.0);
    for (int i = 0; i < 40; ++i) {
      CHECK_FALSE(r(i, i));
      for (int j = 0; j < 40; ++j) CHECK(r(i, j) == r(j, i));
    }
  }
}

TEST_CASE("interference_sigma") {
  CHECK(interference_sigma(0.0, 500) == 0.0);
  CHECK(interference_sigma(1.0, 100) == 10.0);
  CHECK(interference_sigma(0.5, 400) == 10.0);
}

TEST_CASE("sample_rssi deterministic part") {
  SimConfig c;
  c.noise_variance = 0.0;
  c.interference_scale = 0.0;
  Rng rng = make_rng(1);
  CHECK(sample_rssi(c, c.ref_distance, rng) == c.ref_rssi);
  c.path_loss_exponent = 2.0;
  CHECK(sample_rssi(c, 10.0 * c.ref_distance, rng) == doctest::Approx(c.ref_rssi - 20.0).epsilon(1e-14));
  // Clamp below min_distance.
  CHECK(sample_rssi(c, 0.0, rng) == sample_rssi(c, c.min_distance, rng));
  double prev = sample_rssi(c, 0.5, rng);
  for (double d = 1.0; d < 100.0; d += 3.7) {
    const double r = sample_rssi(c, d, rng);
    CHECK(r < prev);
    prev = r;
  }
  CHECK_THROWS(sample_rssi(c, -1.0, rng));
}

TEST_CASE("sample_rssi statistics") {
  SimConfig c;
  c.noise_variance = 0.25;
  const double d = 12.5;
  const double expected =
      c.ref_rssi - 10.0 * c.path_loss_exponent * std::log10(d / c.ref_distance);
  const int n = 100000;
  const Moments m = draw_moments(c, d, n, 42);
  CHECK(std::abs(m.mean - expected) < 3.0 * std::sqrt(0.25 / n));
  CHECK(std::abs(m.var - 0.25) < 0.05 * 0.25);

  c.interference_scale = 0.1;
  c.node_count = 100;
  const double total = 0.25 + 0.01 * 100;
  const Moments mi = draw_moments(c, d, n, 43);
  CHECK(std::abs(mi.mean - expected) < 3.0 * std::sqrt(total / n));
  CHECK(std::abs(mi.var - total) < 0.05 * total);
}

TEST_CASE("acquire_features") {
  SimConfig c;
  c.node_count = 30;
  c.window = 4;
  c.anchor_fraction = 0.2;
  c.seed = 3;
  c.miss_probability = 0.1;
  const NetworkTopology t = generate_topology(c);
  const AdjacencyMatrix a = compute_adjacency(t, c.radio_range);
  Rng rng = make_rng(9);
  const FeatureTensor f = acquire_features(t, a, c, rng);
  const int n = c.node_count;
  CHECK(f.nodes() == n);
  CHECK(f.width() == n + 2);
  CHECK(f.steps() == 4);

  int measured = 0, missing = 0;
  for (int i = 0; i < n; ++i) {
    for (int tt = 0; tt < c.window; ++tt) {
      CHECK(f.at(i, i, tt) == 0.0);
      if (t.anchor_flags[i]) {
        for (int j = 0; j < n; ++j) {
          CHECK(f.at(i, j, tt) == 0.0);
          CHECK_FALSE(f.missing(i, j, tt));
        }
        CHECK(f.at(i, n, tt) == t.positions[i].x);
        CHECK(f.at(i, n + 1, tt) == t.positions[i].y);
      } else {
        CHECK(f.at(i, n, tt) == 0.0);
        CHECK(f.at(i, n + 1, tt) == 0.0);
        for (int j = 0; j < n; ++j) {
          if (!a(i, j)) {
            CHECK(f.at(i, j, tt) == 0.0);
            CHECK_FALSE(f.missing(i, j, tt));
            continue;
          }
          ++measured;
          if (f.missing(i, j, tt)) ++missing;
        }
      }
    }
  }
  REQUIRE(measured > 200);
  const double rate = static_cast<double>(missing) / measured;
  CHECK(rate > 0.05);
  CHECK(rate < 0.15);

  Rng again = make_rng(9);
  CHECK(acquire_features(t, a, c, again) == f);
}

TEST_CASE("anchor-free acquisition measures every node") {
  SimConfig c;
  c.node_count = 12;
  c.anchor_fraction = 0.0;
  c.window = 2;
  c.radio_range = 60.0;
  c.miss_probability = 0.0;
  const NetworkTopology t = generate_topology(c);
  const AdjacencyMatrix a = compute_adjacency(t, c.radio_range);
  Rng rng = make_rng(1);
  const FeatureTensor f = acquire_features(t, a, c, rng);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) CHECK((f.at(i, j, 0) != 0.0) == a(i, j));
}

TEST_CASE("route_and_count on hand-built topologies") {
  SimConfig c;
  c.window = 3;
  c.radio_range = 20.0;

  SUBCASE("star: everyone within the central unit's range") {
    const auto t = place({{45, 50}, {55, 50}, {50, 45}, {50, 60}});
    const auto r = route_and_count(t, compute_adjacency(t, 20.0), c);
    for (int i = 0; i < 4; ++i) CHECK(*r.forward_counts[i] == 1);
    CHECK(r.unreachable.empty());
  }
  SUBCASE("chain through one relay plus a stranded node") {
    const auto t = place({{60, 50}, {78, 50}, {5, 5}});
    const AdjacencyMatrix a = compute_adjacency(t, 20.0);
    const auto r = route_and_count(t, a, c);
    CHECK(*r.forward_counts[0] == 2);
    CHECK(*r.forward_counts[1] == 1);
    CHECK(r.parent[1] == 0);
    CHECK(r.hop_level[1] == 2);
    CHECK_FALSE(r.forward_counts[2].has_value());
    CHECK(r.unreachable == std::vector<int>{2});
    // Costs: node 0 has one neighbor, node 1 has one neighbor.
    CHECK(r.total_cost == (3 * 1 + 2) + (3 * 1 + 1));
  }
  SUBCASE("ties resolve to the lowest-index parent") {
    const auto t = place({{60, 55}, {60, 45}, {75, 50}});
    const auto r = route_and_count(t, compute_adjacency(t, 20.0), c);
    CHECK(r.parent[2] == 0);
    CHECK(*r.forward_counts[0] == 2);
    CHECK(*r.forward_counts[1] == 1);
  }
}

TEST_CASE("route_and_count agrees with the enumerated tree and closed forms") {
  for (int n = 5; n <= 10; ++n) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      for (double alpha : {0.0, 0.3}) {
        SimConfig c;
        c.node_count = n;
        c.anchor_fraction = alpha;
        c.radio_range = 30.0;
        c.window = 1 + static_cast<int>(seed % 7);
        c.seed = seed * 31 + n;
        const NetworkTopology t = generate_topology(c);
        const AdjacencyMatrix a = compute_adjacency(t, c.radio_range);
        const ComplexityReport r = route_and_count(t, a, c);
        const oracle::RouteOracle o = oracle::route(t, a, c.radio_range);

        long sum_nn = 0, sum_h = 0, anchor_nn = 0, anchors = 0;
        for (int i = 0; i < n; ++i) {
          CHECK(r.hop_level[i] == o.hops[i]);
          CHECK(r.parent[i] == o.parent[i]);
          if (o.hops[i] < 0) {
            CHECK_FALSE(r.forward_counts[i].has_value());
            continue;
          }
          REQUIRE(r.forward_counts[i].has_value());
          CHECK(*r.forward_counts[i] == o.forward[i]);
          CHECK(*r.forward_counts[i] >= 1);
          sum_nn += a.degree(i);
          sum_h += o.forward[i];
          if (t.anchor_flags[i]) {
            anchor_nn += a.degree(i);
            ++anchors;
          }
        }
        const long T = c.window;
        const long expected = alpha == 0.0 ? T * sum_nn + sum_h
                                           : T * sum_nn + sum_h - T * (anchor_nn - anchors);
        CHECK(r.total_cost == expected);
        CHECK(r.anchor_based == (alpha > 0.0));

        long per_node = 0;
        for (const auto& cost : r.per_node_cost) per_node += cost.value_or(0);
        CHECK(per_node == r.total_cost);

        // Packets over tree edges: every reachable node's data crosses one
        // edge per hop, so the edge loads sum to the total hop count.
        long hops = 0;
        for (int i = 0; i < n; ++i) hops += std::max(o.hops[i], 0);
        CHECK(hops == sum_h);
      }
    }
  }
}
