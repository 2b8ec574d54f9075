#include "wsnloc/model.hpp"

#include <cmath>
#include <fstream>

#include "wsnloc/baselines.hpp"
#include "wsnloc/spatial_attention.hpp"
#include "wsnloc/temporal_encoder.hpp"

namespace wsnloc {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::UBiGTLoc: return "ubigtloc";
    case ModelKind::Baseline1: return "baseline1";
    case ModelKind::Baseline2: return "baseline2";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "ubigtloc") return ModelKind::UBiGTLoc;
  if (name == "baseline1") return ModelKind::Baseline1;
  if (name == "baseline2") return ModelKind::Baseline2;
  throw ConfigError("unknown model '" + std::string(name) + "' (expected ubigtloc|baseline1|baseline2)");
}

Index ModelConfig::encoding_width() const {
  return kind == ModelKind::UBiGTLoc ? 2 * static_cast<Index>(temporal_hidden) : feature_width();
}

void ModelConfig::validate() const {
  if (node_count < 2) throw ConfigError("model node_count must be >= 2");
  if (window < 1) throw ConfigError("model window must be >= 1");
  if (temporal_hidden < 1 || spatial_hidden < 1) throw ConfigError("hidden sizes must be >= 1");
  if (heads < 1) throw ConfigError("heads must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0,1)");
  if (!(field_side > 0.0)) throw ConfigError("field_side must be > 0");
  if (kind == ModelKind::Baseline2) EwmaConfig{ewma_decay}.validate();
}

nlohmann::json ModelConfig::to_json() const {
  return {{"model", to_string(kind)},
          {"node_count", node_count},
          {"window", window},
          {"hidden_temporal", temporal_hidden},
          {"hidden_spatial", spatial_hidden},
          {"heads", heads},
          {"dropout", dropout},
          {"dropout_after_layer2", dropout_after_layer2},
          {"ewma_decay", ewma_decay},
          {"field_side", field_side},
          {"bn_epsilon", bn_epsilon},
          {"bn_momentum", bn_momentum}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.kind = parse_model_kind(j.at("model").get<std::string>());
  c.node_count = j.at("node_count").get<int>();
  c.window = j.at("window").get<int>();
  c.temporal_hidden = j.at("hidden_temporal").get<int>();
  c.spatial_hidden = j.at("hidden_spatial").get<int>();
  c.heads = j.at("heads").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.dropout_after_layer2 = j.at("dropout_after_layer2").get<bool>();
  c.ewma_decay = j.at("ewma_decay").get<double>();
  c.field_side = j.at("field_side").get<double>();
  c.bn_epsilon = j.at("bn_epsilon").get<double>();
  c.bn_momentum = j.at("bn_momentum").get<double>();
  return c;
}

ParameterSet initialize_parameters(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng = make_rng(seed, {0x696e6974ULL});
  ParameterSet params;
  if (cfg.kind == ModelKind::UBiGTLoc) {
    LstmWeights::random(cfg.temporal_hidden, cfg.feature_width(), rng).add_to(params, "lstm.fwd");
    LstmWeights::random(cfg.temporal_hidden, cfg.feature_width(), rng).add_to(params, "lstm.bwd");
  }
  AttentionLayerWeights::random(cfg.heads, cfg.spatial_hidden, cfg.encoding_width(), rng)
      .add_to(params, "attn1");
  AttentionLayerWeights::random(cfg.heads, cfg.spatial_hidden, cfg.spatial_hidden, rng)
      .add_to(params, "attn2");
  BatchNormParams::identity(cfg.spatial_hidden).add_to(params);
  ProjectionParams head;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.spatial_hidden));
  head.weight = Matrix(2, cfg.spatial_hidden);
  for (Index i = 0; i < head.weight.size(); ++i) head.weight.data()[i] = bound * u(rng);
  head.bias = Matrix::Zero(1, 2);
  head.add_to(params);
  return params;
}

namespace {

Var encode(Tape& tape, const ModelConfig& cfg, const ParameterSet& params, const ModelInput& in) {
  if (static_cast<int>(in.slices.size()) != cfg.window) {
    throw ShapeError("sample has " + std::to_string(in.slices.size()) +
                     " time slices, model expects " + std::to_string(cfg.window));
  }
  for (const Matrix& s : in.slices) {
    expect_shape(s, cfg.node_count, cfg.feature_width(), "feature slice");
  }
  switch (cfg.kind) {
    case ModelKind::UBiGTLoc: {
      std::vector<Var> xs;
      xs.reserve(in.slices.size());
      for (const Matrix& s : in.slices) xs.push_back(tape.constant(s));
      return bilstm_encode(tape, xs, bind_lstm(tape, params, "lstm.fwd"),
                           bind_lstm(tape, params, "lstm.bwd"));
    }
    case ModelKind::Baseline1:
      return tape.constant(in.slices.back());
    case ModelKind::Baseline2:
      return tape.constant(ewma_encode(in.slices, EwmaConfig{cfg.ewma_decay}));
  }
  throw std::logic_error("unhandled model kind");
}

}  // namespace

BatchOutput run_batch(const ModelConfig& cfg, const ParameterSet& params,
                      std::span<const ModelInput* const> batch, Mode mode,
                      std::uint64_t dropout_seed, Gradients* grads, BatchStats* stats) {
  if (batch.empty()) throw std::invalid_argument("run_batch: empty batch");
  Tape tape;
  const AttentionVars layer1 = bind_attention(tape, params, "attn1");
  const AttentionVars layer2 = bind_attention(tape, params, "attn2");
  const SpatialOptions options{mode, cfg.dropout, cfg.dropout_after_layer2};

  std::vector<Var> spatial;
  spatial.reserve(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const ModelInput& in = *batch[s];
    if (in.neighbors.node_count() != cfg.node_count) {
      throw ShapeError("sample has " + std::to_string(in.neighbors.node_count()) +
                       " nodes, model expects " + std::to_string(cfg.node_count));
    }
    Rng rng = make_rng(dropout_seed, {s});
    const Var g = encode(tape, cfg, params, in);
    spatial.push_back(spatial_forward(tape, g, in.neighbors, layer1, layer2, options, rng).second);
  }

  const Var pooled = spatial.size() == 1 ? spatial.front() : tape.concat_rows(spatial);
  const Var z = batch_norm(tape, pooled, tape.param(params, "bn.gamma"),
                           tape.param(params, "bn.delta"), mode, params["bn.run_mu"],
                           params["bn.run_var"], cfg.bn_epsilon, stats);
  const Var unit = project_coordinates(tape, z, tape.param(params, "head.W"),
                                       tape.param(params, "head.b"));
  // The head regresses coordinates in [-1, 1] field units; map to meters.
  const double half = cfg.field_side / 2.0;
  const Var coords = tape.shift(tape.scale(unit, half), half);

  BatchOutput out;
  Var total;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const Var pred = tape.slice_rows(coords, static_cast<Index>(s) * cfg.node_count, cfg.node_count);
    const Var loss = masked_mse(tape, pred, batch[s]->truth, batch[s]->regular);
    out.predictions.push_back(tape.value(pred));
    out.losses.push_back(tape.value(loss)(0, 0));
    total = total.valid() ? tape.add(total, loss) : loss;
  }
  const Var mean = tape.scale(total, 1.0 / static_cast<double>(batch.size()));
  out.loss = tape.value(mean)(0, 0);
  if (grads) {
    tape.backward(mean);
    tape.accumulate_param_grads(*grads);
  }
  return out;
}

Matrix predict(const ModelConfig& cfg, const ParameterSet& params, const ModelInput& input) {
  const ModelInput* one[] = {&input};
  return run_batch(cfg, params, one, Mode::Eval, 0).predictions.front();
}

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt) {
  nlohmann::json j = parameters_to_json(ckpt.params);
  j["model_config"] = ckpt.model.to_json();
  j["train_config"] = ckpt.train_config;
  return j;
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  Checkpoint c;
  c.model = ModelConfig::from_json(j.at("model_config"));
  c.params = parameters_from_json(j);
  if (j.contains("train_config")) c.train_config = j.at("train_config");
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out << checkpoint_to_json(ckpt).dump() << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path);
  return checkpoint_from_json(nlohmann::json::parse(in));
}

}  // namespace wsnloc
