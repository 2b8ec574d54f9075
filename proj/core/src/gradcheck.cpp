#include "wsnloc/gradcheck.hpp"

#include "wsnloc/dataset.hpp"

namespace wsnloc {

ExperimentConfig gradcheck_defaults() {
  ExperimentConfig c;
  c.sim.node_count = 6;
  c.sim.window = 3;
  c.sim.anchor_fraction = 0.34;
  c.sim.radio_range = 60.0;
  c.train.hidden_temporal = 4;
  c.train.hidden_spatial = 4;
  c.train.heads = 2;
  c.train.dropout = 0.2;
  c.train.seed = 1;
  c.sim.seed = 1;
  return c;
}

std::vector<ModelGradCheck> run_gradcheck(const ExperimentConfig& cfg, double step, double floor) {
  cfg.validate();
  const auto data = build_dataset(cfg.sim, 2, 1, cfg.train.seed);
  const auto samples = prepare_samples(data);
  const ModelInput* batch[] = {&samples[0].input, &samples[1].input};
  const std::uint64_t dropout_seed = cfg.train.seed + 17;

  std::vector<ModelGradCheck> out;
  for (ModelKind kind : {ModelKind::UBiGTLoc, ModelKind::Baseline1, ModelKind::Baseline2}) {
    TrainConfig tc = cfg.train;
    tc.model = kind;
    const ModelConfig mc = tc.model_config(cfg.sim.node_count, cfg.sim.window, cfg.sim.field_side);
    const ParameterSet params = initialize_parameters(mc, cfg.train.seed);

    Gradients analytic = zero_gradients(params);
    run_batch(mc, params, batch, Mode::Train, dropout_seed, &analytic);
    const auto loss = [&](const ParameterSet& p) {
      return run_batch(mc, p, batch, Mode::Train, dropout_seed).loss;
    };
    const Gradients numeric = finite_diff_grad(loss, params, step, 4);

    ModelGradCheck r;
    r.model = kind;
    r.coordinates = params.scalar_count();
    r.result = compare_gradients(params, analytic, numeric, floor);
    out.push_back(r);
  }
  return out;
}

}  // namespace wsnloc
