#include "wsnloc/spatial_attention.hpp"

#include <cmath>

namespace wsnloc {

namespace {

Matrix uniform(Index rows, Index cols, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = bound * u(rng);
  return m;
}

std::string head_name(const std::string& prefix, int e, const char* what) {
  return prefix + ".head" + std::to_string(e + 1) + "." + what;
}

}  // namespace

AttentionLayerWeights AttentionLayerWeights::random(int heads, Index hidden, Index input_width,
                                                    Rng& rng) {
  if (heads < 1) throw ConfigError("attention layer needs at least one head");
  AttentionLayerWeights w;
  for (int e = 0; e < heads; ++e) {
    w.query.push_back(uniform(hidden, input_width, rng));
    w.key.push_back(uniform(hidden, input_width, rng));
    w.value.push_back(uniform(hidden, input_width, rng));
  }
  w.skip = uniform(hidden, input_width, rng);
  w.head_projection = uniform(hidden, heads * hidden, rng);
  return w;
}

void AttentionLayerWeights::add_to(ParameterSet& params, const std::string& prefix) const {
  for (int e = 0; e < heads(); ++e) {
    params.add(head_name(prefix, e, "Wq"), query[e]);
    params.add(head_name(prefix, e, "Wk"), key[e]);
    params.add(head_name(prefix, e, "Wv"), value[e]);
  }
  params.add(prefix + ".W0", skip);
  params.add(prefix + ".WE", head_projection);
}

AttentionLayerWeights AttentionLayerWeights::from(const ParameterSet& params,
                                                  const std::string& prefix) {
  AttentionLayerWeights w;
  for (int e = 0; params.contains(head_name(prefix, e, "Wq")); ++e) {
    w.query.push_back(params[head_name(prefix, e, "Wq")]);
    w.key.push_back(params[head_name(prefix, e, "Wk")]);
    w.value.push_back(params[head_name(prefix, e, "Wv")]);
  }
  w.skip = params[prefix + ".W0"];
  w.head_projection = params[prefix + ".WE"];
  return w;
}

AttentionVars bind_attention(Tape& tape, const ParameterSet& params, const std::string& prefix) {
  AttentionVars v;
  for (int e = 0; params.contains(head_name(prefix, e, "Wq")); ++e) {
    v.query.push_back(tape.param(params, head_name(prefix, e, "Wq")));
    v.key.push_back(tape.param(params, head_name(prefix, e, "Wk")));
    v.value.push_back(tape.param(params, head_name(prefix, e, "Wv")));
  }
  v.skip = tape.param(params, prefix + ".W0");
  v.head_projection = tape.param(params, prefix + ".WE");
  return v;
}

AttentionVars bind_attention(Tape& tape, const AttentionLayerWeights& w) {
  AttentionVars v;
  for (int e = 0; e < w.heads(); ++e) {
    v.query.push_back(tape.constant(w.query[e]));
    v.key.push_back(tape.constant(w.key[e]));
    v.value.push_back(tape.constant(w.value[e]));
  }
  v.skip = tape.constant(w.skip);
  v.head_projection = tape.constant(w.head_projection);
  return v;
}

Var transformer_conv(Tape& tape, Var input, const NeighborLists& neighbors, const AttentionVars& w,
                     std::vector<std::vector<double>>* coefficients) {
  const Matrix& skip = tape.value(w.skip);
  if (tape.value(input).cols() != skip.cols()) {
    throw ShapeError("transformer_conv: input " + shape_string(tape.value(input)) +
                     " does not match layer input width " + std::to_string(skip.cols()));
  }
  const int heads = static_cast<int>(w.query.size());
  const double scale = 1.0 / std::sqrt(static_cast<double>(skip.rows()));
  if (coefficients) coefficients->assign(static_cast<std::size_t>(heads), {});
  std::vector<Var> per_head;
  per_head.reserve(static_cast<std::size_t>(heads));
  for (int e = 0; e < heads; ++e) {
    const Var q = tape.matmul_bt(input, w.query[e]);
    const Var k = tape.matmul_bt(input, w.key[e]);
    const Var v = tape.matmul_bt(input, w.value[e]);
    per_head.push_back(tape.neighbor_attention(q, k, v, neighbors, scale,
                                               coefficients ? &(*coefficients)[e] : nullptr));
  }
  const Var heads_cat = heads == 1 ? per_head.front() : tape.concat_cols(per_head);
  return tape.add(tape.matmul_bt(input, w.skip), tape.matmul_bt(heads_cat, w.head_projection));
}

Matrix dropout_mask(Index rows, Index cols, double p, Rng& rng) {
  if (p <= 0.0) return Matrix::Ones(rows, cols);
  if (p >= 1.0) return Matrix::Zero(rows, cols);
  std::bernoulli_distribution keep(1.0 - p);
  const double s = 1.0 / (1.0 - p);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = keep(rng) ? s : 0.0;
  return m;
}

SpatialOutputVars spatial_forward(Tape& tape, Var encoding, const NeighborLists& neighbors,
                                  const AttentionVars& layer1, const AttentionVars& layer2,
                                  const SpatialOptions& options, Rng& rng) {
  auto drop = [&](Var x) {
    if (options.mode == Mode::Eval || options.dropout <= 0.0) return x;
    const Matrix& v = tape.value(x);
    return tape.mask(x, dropout_mask(v.rows(), v.cols(), options.dropout, rng));
  };
  const Var first = drop(tape.relu(transformer_conv(tape, encoding, neighbors, layer1)));
  Var second = tape.relu(transformer_conv(tape, first, neighbors, layer2));
  if (options.dropout_after_layer2) second = drop(second);
  return {first, second};
}

std::vector<std::vector<double>> attention_coefficients(const Matrix& input,
                                                        const NeighborLists& neighbors,
                                                        const AttentionLayerWeights& w) {
  Tape tape;
  std::vector<std::vector<double>> beta;
  transformer_conv(tape, tape.constant(input), neighbors, bind_attention(tape, w), &beta);
  return beta;
}

Matrix transformer_conv(const Matrix& input, const NeighborLists& neighbors,
                        const AttentionLayerWeights& w) {
  Tape tape;
  return tape.value(transformer_conv(tape, tape.constant(input), neighbors, bind_attention(tape, w)));
}

Matrix spatial_forward(const Matrix& encoding, const NeighborLists& neighbors,
                       const AttentionLayerWeights& layer1, const AttentionLayerWeights& layer2,
                       const SpatialOptions& options, Rng& rng) {
  Tape tape;
  const auto out = spatial_forward(tape, tape.constant(encoding), neighbors,
                                   bind_attention(tape, layer1), bind_attention(tape, layer2),
                                   options, rng);
  return tape.value(out.second);
}

}  // namespace wsnloc
