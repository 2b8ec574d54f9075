#include "wsnloc/global_synthesis.hpp"

#include <cmath>

namespace wsnloc {

namespace {

int regular_count(const std::vector<bool>& regular) {
  int n = 0;
  for (bool r : regular) n += r ? 1 : 0;
  return n;
}

void check_loss_inputs(const Matrix& pred, const Matrix& truth, const std::vector<bool>& regular) {
  expect_shape(pred, static_cast<Index>(regular.size()), 2, "prediction");
  expect_shape(truth, static_cast<Index>(regular.size()), 2, "ground truth");
  if (regular_count(regular) == 0) {
    throw std::invalid_argument("localization loss undefined without regular nodes");
  }
}

}  // namespace

BatchNormParams BatchNormParams::identity(Index channels) {
  BatchNormParams bn;
  bn.gamma = Matrix::Ones(1, channels);
  bn.delta = Matrix::Zero(1, channels);
  bn.running_mean = Matrix::Zero(1, channels);
  bn.running_var = Matrix::Ones(1, channels);
  return bn;
}

void BatchNormParams::add_to(ParameterSet& params) const {
  params.add("bn.gamma", gamma);
  params.add("bn.delta", delta);
  params.add("bn.run_mu", running_mean);
  params.add("bn.run_var", running_var);
}

BatchNormParams BatchNormParams::from(const ParameterSet& params) {
  BatchNormParams bn;
  bn.gamma = params["bn.gamma"];
  bn.delta = params["bn.delta"];
  bn.running_mean = params["bn.run_mu"];
  bn.running_var = params["bn.run_var"];
  return bn;
}

void ProjectionParams::add_to(ParameterSet& params) const {
  params.add("head.W", weight);
  params.add("head.b", bias);
}

ProjectionParams ProjectionParams::from(const ParameterSet& params) {
  return {params["head.W"], params["head.b"]};
}

Var batch_norm(Tape& tape, Var x, Var gamma, Var delta, Mode mode, const Matrix& running_mean,
               const Matrix& running_var, double epsilon, BatchStats* stats) {
  if (mode == Mode::Train) {
    BatchStats local;
    const Var out = tape.batch_norm(x, gamma, delta, epsilon, &local.mean, &local.var);
    local.rows = tape.value(x).rows();
    if (stats) *stats = std::move(local);
    return out;
  }
  const Index channels = tape.value(x).cols();
  expect_shape(running_mean, 1, channels, "batch_norm running mean");
  expect_shape(running_var, 1, channels, "batch_norm running variance");
  const Var centered = tape.add_row(x, tape.constant(-running_mean));
  const Var inv_std = tape.constant((running_var.array() + epsilon).rsqrt().matrix());
  return tape.add_row(tape.mul_row(tape.mul_row(centered, inv_std), gamma), delta);
}

void update_running_stats(BatchNormParams& bn, const BatchStats& stats) {
  const double rows = static_cast<double>(stats.rows);
  const double unbias = rows > 1 ? rows / (rows - 1.0) : 1.0;
  bn.running_mean = (1.0 - bn.momentum) * bn.running_mean + bn.momentum * stats.mean;
  bn.running_var = (1.0 - bn.momentum) * bn.running_var + bn.momentum * unbias * stats.var;
}

void update_running_stats(ParameterSet& params, double momentum, const BatchStats& stats) {
  BatchNormParams bn = BatchNormParams::from(params);
  bn.momentum = momentum;
  update_running_stats(bn, stats);
  params["bn.run_mu"] = bn.running_mean;
  params["bn.run_var"] = bn.running_var;
}

Var project_coordinates(Tape& tape, Var z, Var weight, Var bias) {
  if (tape.value(weight).rows() != 2) {
    throw ShapeError("projection must produce 2 coordinates, weight is " +
                     shape_string(tape.value(weight)));
  }
  return tape.add_row(tape.matmul_bt(z, weight), bias);
}

Var masked_mse(Tape& tape, Var pred, const Matrix& truth, const std::vector<bool>& regular) {
  check_loss_inputs(tape.value(pred), truth, regular);
  Matrix row_mask(truth.rows(), 2);
  for (Index i = 0; i < truth.rows(); ++i) row_mask.row(i).setConstant(regular[i] ? 1.0 : 0.0);
  const Var diff = tape.mask(tape.sub(pred, tape.constant(truth)), row_mask);
  return tape.scale(tape.sum(tape.mul(diff, diff)), 1.0 / regular_count(regular));
}

Matrix batch_norm(const Matrix& x, BatchNormParams& bn, Mode mode) {
  Tape tape;
  BatchStats stats;
  const Var out = batch_norm(tape, tape.constant(x), tape.constant(bn.gamma),
                             tape.constant(bn.delta), mode, bn.running_mean, bn.running_var,
                             bn.epsilon, &stats);
  if (mode == Mode::Train) update_running_stats(bn, stats);
  return tape.value(out);
}

Matrix project_coordinates(const Matrix& z, const ProjectionParams& p) {
  Tape tape;
  return tape.value(
      project_coordinates(tape, tape.constant(z), tape.constant(p.weight), tape.constant(p.bias)));
}

double masked_mse(const Matrix& pred, const Matrix& truth, const std::vector<bool>& regular) {
  check_loss_inputs(pred, truth, regular);
  double s = 0.0;
  for (Index i = 0; i < pred.rows(); ++i) {
    if (regular[i]) s += (pred.row(i) - truth.row(i)).squaredNorm();
  }
  return s / regular_count(regular);
}

std::vector<double> regular_node_errors(const Matrix& pred, const Matrix& truth,
                                        const std::vector<bool>& regular) {
  check_loss_inputs(pred, truth, regular);
  std::vector<double> errors;
  for (Index i = 0; i < pred.rows(); ++i) {
    if (regular[i]) errors.push_back((pred.row(i) - truth.row(i)).norm());
  }
  return errors;
}

double mean_euclidean_error(const Matrix& pred, const Matrix& truth,
                            const std::vector<bool>& regular) {
  const auto errors = regular_node_errors(pred, truth, regular);
  double s = 0.0;
  for (double e : errors) s += e;
  return s / static_cast<double>(errors.size());
}

}  // namespace wsnloc
