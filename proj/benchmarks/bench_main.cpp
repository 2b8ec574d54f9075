#include <benchmark/benchmark.h>

#include "wsnloc/dataset.hpp"
#include "wsnloc/model.hpp"
#include "wsnloc/net_sim.hpp"
#include "wsnloc/training.hpp"

using namespace wsnloc;

namespace {

// Desk-scale graph batch shared by the model benchmarks.
struct DeskBatch {
  ModelConfig cfg;
  ParameterSet params;
  std::vector<TrainingSample> samples;
  std::vector<const ModelInput*> inputs;

  DeskBatch(ModelKind kind, int window) {
    SimConfig sim;
    sim.node_count = 60;
    sim.window = window;
    samples = prepare_samples(build_dataset(sim, 4, 4, 1));
    TrainConfig tc;
    tc.model = kind;
    tc.hidden_temporal = tc.hidden_spatial = 32;
    cfg = tc.model_config(sim.node_count, window, sim.field_side);
    params = initialize_parameters(cfg, 1);
    for (const auto& s : samples) inputs.push_back(&s.input);
  }
};

void BM_TrainStep(benchmark::State& state) {
  const DeskBatch b(static_cast<ModelKind>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    Gradients g = zero_gradients(b.params);
    BatchStats stats;
    const BatchOutput out = run_batch(b.cfg, b.params, b.inputs, Mode::Train, 7, &g, &stats);
    benchmark::DoNotOptimize(out.loss);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(b.inputs.size()));
}
BENCHMARK(BM_TrainStep)
    ->ArgsProduct({{static_cast<int>(ModelKind::UBiGTLoc)}, {2, 5, 12}})
    ->Args({static_cast<int>(ModelKind::Baseline1), 5})
    ->Args({static_cast<int>(ModelKind::Baseline2), 5})
    ->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State& state) {
  const DeskBatch b(ModelKind::UBiGTLoc, 5);
  for (auto _ : state) benchmark::DoNotOptimize(predict(b.cfg, b.params, b.samples.front().input));
}
BENCHMARK(BM_Predict)->Unit(benchmark::kMillisecond);

void BM_AcquireFeatures(benchmark::State& state) {
  SimConfig c;
  c.node_count = static_cast<int>(state.range(0));
  c.window = 10;
  const NetworkTopology t = generate_topology(c);
  const AdjacencyMatrix a = compute_adjacency(t, c.radio_range);
  Rng rng = make_rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(acquire_features(t, a, c, rng));
}
BENCHMARK(BM_AcquireFeatures)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_RouteAndCount(benchmark::State& state) {
  SimConfig c;
  c.node_count = static_cast<int>(state.range(0));
  const NetworkTopology t = generate_topology(c);
  const AdjacencyMatrix a = compute_adjacency(t, c.radio_range);
  for (auto _ : state) benchmark::DoNotOptimize(route_and_count(t, a, c));
}
BENCHMARK(BM_RouteAndCount)->Arg(100)->Arg(500);

}  // namespace
BENCHMARK_MAIN();
