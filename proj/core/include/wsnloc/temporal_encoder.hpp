#pragma once

#include <span>
#include <string>
#include <vector>

#include "wsnloc/net_sim.hpp"
#include "wsnloc/tape.hpp"

namespace wsnloc {

/// Gate weights act on the row concatenation [h_{t-1}, x_t]; every matrix is
/// hidden x (hidden + input_width) and every bias is 1 x hidden.
struct LstmWeights {
  Matrix W_forget, W_candidate, W_input, W_output;
  Matrix b_forget, b_candidate, b_input, b_output;

  Index hidden() const { return W_forget.rows(); }
  Index input_width() const { return W_forget.cols() - W_forget.rows(); }

  static LstmWeights zeros(Index hidden, Index input_width);
  /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] with fan_in = hidden + input_width.
  static LstmWeights random(Index hidden, Index input_width, Rng& rng);

  /// Adds the eight tensors under prefix.{W_λ,W_C,W_φ,W_o,b_λ,b_C,b_φ,b_o}.
  void add_to(ParameterSet& params, const std::string& prefix) const;
  static LstmWeights from(const ParameterSet& params, const std::string& prefix);
};

struct LstmState {
  Matrix h;
  Matrix c;
};

struct LstmVars {
  Var W_forget, W_candidate, W_input, W_output;
  Var b_forget, b_candidate, b_input, b_output;
};

struct LstmStateVars {
  Var h;
  Var c;
};

LstmVars bind_lstm(Tape& tape, const ParameterSet& params, const std::string& prefix);
LstmVars bind_lstm(Tape& tape, const LstmWeights& w);

LstmStateVars lstm_cell(Tape& tape, Var x, LstmStateVars state, const LstmVars& w);

/// Forward pass over t = 1..T and backward pass over t = T..1 from zero
/// states; returns [h_fwd(T) | h_bwd(1)] as an N x 2H matrix.
Var bilstm_encode(Tape& tape, std::span<const Var> slices, const LstmVars& forward,
                  const LstmVars& backward);

// Value-level conveniences over a throwaway tape.
LstmState lstm_cell(const Matrix& x, const LstmState& state, const LstmWeights& w);
Matrix bilstm_encode(std::span<const Matrix> slices, const LstmWeights& forward,
                     const LstmWeights& backward);

}  // namespace wsnloc
