#include "wsnloc/temporal_encoder.hpp"

#include <array>
#include <cmath>

namespace wsnloc {

namespace {

constexpr std::array<const char*, 8> kLstmNames = {"W_λ", "W_C", "W_φ", "W_o",
                                                   "b_λ", "b_C", "b_φ", "b_o"};

Matrix uniform(Index rows, Index cols, double bound, Rng& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

std::array<Matrix*, 8> members(LstmWeights& w) {
  return {&w.W_forget, &w.W_candidate, &w.W_input, &w.W_output,
          &w.b_forget, &w.b_candidate, &w.b_input, &w.b_output};
}

Var gate(Tape& tape, Var z, Var W, Var b) { return tape.add_row(tape.matmul_bt(z, W), b); }

}  // namespace

LstmWeights LstmWeights::zeros(Index hidden, Index input_width) {
  LstmWeights w;
  for (Matrix* m : {&w.W_forget, &w.W_candidate, &w.W_input, &w.W_output}) {
    *m = Matrix::Zero(hidden, hidden + input_width);
  }
  for (Matrix* m : {&w.b_forget, &w.b_candidate, &w.b_input, &w.b_output}) {
    *m = Matrix::Zero(1, hidden);
  }
  return w;
}

LstmWeights LstmWeights::random(Index hidden, Index input_width, Rng& rng) {
  LstmWeights w = zeros(hidden, input_width);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden + input_width));
  for (Matrix* m : members(w)) *m = uniform(m->rows(), m->cols(), bound, rng);
  return w;
}

void LstmWeights::add_to(ParameterSet& params, const std::string& prefix) const {
  auto self = *this;
  auto ms = members(self);
  for (std::size_t i = 0; i < ms.size(); ++i) params.add(prefix + "." + kLstmNames[i], *ms[i]);
}

LstmWeights LstmWeights::from(const ParameterSet& params, const std::string& prefix) {
  LstmWeights w;
  auto ms = members(w);
  for (std::size_t i = 0; i < ms.size(); ++i) *ms[i] = params[prefix + "." + kLstmNames[i]];
  return w;
}

LstmVars bind_lstm(Tape& tape, const ParameterSet& params, const std::string& prefix) {
  auto p = [&](std::size_t i) { return tape.param(params, prefix + "." + kLstmNames[i]); };
  return {p(0), p(1), p(2), p(3), p(4), p(5), p(6), p(7)};
}

LstmVars bind_lstm(Tape& tape, const LstmWeights& w) {
  return {tape.constant(w.W_forget),    tape.constant(w.W_candidate), tape.constant(w.W_input),
          tape.constant(w.W_output),    tape.constant(w.b_forget),    tape.constant(w.b_candidate),
          tape.constant(w.b_input),     tape.constant(w.b_output)};
}

LstmStateVars lstm_cell(Tape& tape, Var x, LstmStateVars state, const LstmVars& w) {
  const Index hidden = tape.value(w.W_forget).rows();
  const Index width = tape.value(x).cols();
  if (tape.value(w.W_forget).cols() != hidden + width) {
    throw ShapeError("lstm_cell: input width " + std::to_string(width) +
                     " does not match weights " + shape_string(tape.value(w.W_forget)));
  }
  expect_shape(tape.value(state.h), tape.value(x).rows(), hidden, "lstm_cell h");
  expect_shape(tape.value(state.c), tape.value(x).rows(), hidden, "lstm_cell C");

  const std::array<Var, 2> parts{state.h, x};
  const Var z = tape.concat_cols(parts);
  const Var forget = tape.sigmoid(gate(tape, z, w.W_forget, w.b_forget));
  const Var candidate = tape.tanh(gate(tape, z, w.W_candidate, w.b_candidate));
  const Var input = tape.sigmoid(gate(tape, z, w.W_input, w.b_input));
  const Var c = tape.add(tape.mul(forget, state.c), tape.mul(input, candidate));
  const Var output = tape.sigmoid(gate(tape, z, w.W_output, w.b_output));
  const Var h = tape.mul(output, tape.tanh(c));
  return {h, c};
}

Var bilstm_encode(Tape& tape, std::span<const Var> slices, const LstmVars& forward,
                  const LstmVars& backward) {
  if (slices.empty()) throw std::invalid_argument("bilstm_encode: empty sequence");
  const Index rows = tape.value(slices.front()).rows();
  auto run = [&](const LstmVars& w, bool reverse) {
    const Index hidden = tape.value(w.W_forget).rows();
    LstmStateVars s{tape.constant(Matrix::Zero(rows, hidden)),
                    tape.constant(Matrix::Zero(rows, hidden))};
    const std::size_t steps = slices.size();
    for (std::size_t i = 0; i < steps; ++i) {
      s = lstm_cell(tape, slices[reverse ? steps - 1 - i : i], s, w);
    }
    return s.h;
  };
  const std::array<Var, 2> halves{run(forward, false), run(backward, true)};
  return tape.concat_cols(halves);
}

LstmState lstm_cell(const Matrix& x, const LstmState& state, const LstmWeights& w) {
  Tape tape;
  const LstmVars vars = bind_lstm(tape, w);
  const LstmStateVars out =
      lstm_cell(tape, tape.constant(x), {tape.constant(state.h), tape.constant(state.c)}, vars);
  return {tape.value(out.h), tape.value(out.c)};
}

Matrix bilstm_encode(std::span<const Matrix> slices, const LstmWeights& forward,
                     const LstmWeights& backward) {
  Tape tape;
  std::vector<Var> xs;
  xs.reserve(slices.size());
  for (const Matrix& s : slices) xs.push_back(tape.constant(s));
  return tape.value(bilstm_encode(tape, xs, bind_lstm(tape, forward), bind_lstm(tape, backward)));
}

}  // namespace wsnloc
