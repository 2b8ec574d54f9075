#pragma once

#include <string>
#include <vector>

#include "wsnloc/net_sim.hpp"
#include "wsnloc/tape.hpp"

namespace wsnloc {

/// One TransformerConv layer. Head matrices are hidden x input_width; the
/// skip transform is hidden x input_width; the head projection maps the
/// concatenated heads (heads * hidden) back to hidden.
struct AttentionLayerWeights {
  std::vector<Matrix> query;
  std::vector<Matrix> key;
  std::vector<Matrix> value;
  Matrix skip;
  Matrix head_projection;

  int heads() const { return static_cast<int>(query.size()); }
  Index hidden() const { return skip.rows(); }
  Index input_width() const { return skip.cols(); }

  static AttentionLayerWeights random(int heads, Index hidden, Index input_width, Rng& rng);

  /// Names: prefix.head{e}.{Wq,Wk,Wv} for e = 1..E, prefix.{W0,WE}.
  void add_to(ParameterSet& params, const std::string& prefix) const;
  static AttentionLayerWeights from(const ParameterSet& params, const std::string& prefix);
};

struct AttentionVars {
  std::vector<Var> query;
  std::vector<Var> key;
  std::vector<Var> value;
  Var skip;
  Var head_projection;
};

AttentionVars bind_attention(Tape& tape, const ParameterSet& params, const std::string& prefix);
AttentionVars bind_attention(Tape& tape, const AttentionLayerWeights& w);

/// g'_i = W0 g_i + WE [ concat_e sum_{j in N(i)} beta^e_ij V^e_j ].
/// `coefficients`, when given, receives beta per head in neighbor-list order.
Var transformer_conv(Tape& tape, Var input, const NeighborLists& neighbors, const AttentionVars& w,
                     std::vector<std::vector<double>>* coefficients = nullptr);

struct SpatialOptions {
  Mode mode = Mode::Eval;
  double dropout = 0.5;
  bool dropout_after_layer2 = true;
};

struct SpatialOutputVars {
  Var first;   // layer 1 after ReLU and dropout, the input of layer 2
  Var second;  // g''
};

/// Layer1 -> ReLU -> dropout -> Layer2 -> ReLU -> dropout (optional).
/// Dropout is inverted (scaled by 1/(1-p) in train mode, identity in eval).
SpatialOutputVars spatial_forward(Tape& tape, Var encoding, const NeighborLists& neighbors,
                                  const AttentionVars& layer1, const AttentionVars& layer2,
                                  const SpatialOptions& options, Rng& rng);

/// Inverted-dropout mask for a rows x cols activation.
Matrix dropout_mask(Index rows, Index cols, double p, Rng& rng);

// Value-level conveniences.
std::vector<std::vector<double>> attention_coefficients(const Matrix& input,
                                                        const NeighborLists& neighbors,
                                                        const AttentionLayerWeights& w);
Matrix transformer_conv(const Matrix& input, const NeighborLists& neighbors,
                        const AttentionLayerWeights& w);
Matrix spatial_forward(const Matrix& encoding, const NeighborLists& neighbors,
                       const AttentionLayerWeights& layer1, const AttentionLayerWeights& layer2,
                       const SpatialOptions& options, Rng& rng);

}  // namespace wsnloc
