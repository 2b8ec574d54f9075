#pragma once

#include <vector>

#include "wsnloc/tape.hpp"

namespace wsnloc {

struct BatchNormParams {
  Matrix gamma;         // 1 x H
  Matrix delta;         // 1 x H
  Matrix running_mean;  // 1 x H
  Matrix running_var;   // 1 x H
  double epsilon = 1e-5;
  double momentum = 0.1;

  static BatchNormParams identity(Index channels);
  /// Stored as bn.{gamma,delta,run_mu,run_var}.
  void add_to(ParameterSet& params) const;
  static BatchNormParams from(const ParameterSet& params);
};

struct ProjectionParams {
  Matrix weight;  // 2 x H
  Matrix bias;    // 1 x 2

  /// Stored as head.{W,b}.
  void add_to(ParameterSet& params) const;
  static ProjectionParams from(const ParameterSet& params);
};

struct BatchStats {
  Matrix mean;
  Matrix var;  // population variance
  Index rows = 0;
};

/// Train mode normalizes with the batch statistics (reported through
/// `stats`); eval mode uses the supplied running estimates.
Var batch_norm(Tape& tape, Var x, Var gamma, Var delta, Mode mode, const Matrix& running_mean,
               const Matrix& running_var, double epsilon, BatchStats* stats = nullptr);

/// Exponential running-stat update with the unbiased batch variance.
void update_running_stats(BatchNormParams& bn, const BatchStats& stats);
void update_running_stats(ParameterSet& params, double momentum, const BatchStats& stats);

Var project_coordinates(Tape& tape, Var z, Var weight, Var bias);

/// (1/N_r) sum over regular rows of squared coordinate error.
Var masked_mse(Tape& tape, Var pred, const Matrix& truth, const std::vector<bool>& regular);

// Value-level API.
Matrix batch_norm(const Matrix& x, BatchNormParams& bn, Mode mode);
Matrix project_coordinates(const Matrix& z, const ProjectionParams& p);
double masked_mse(const Matrix& pred, const Matrix& truth, const std::vector<bool>& regular);
double mean_euclidean_error(const Matrix& pred, const Matrix& truth,
                            const std::vector<bool>& regular);
/// Euclidean error of every regular node, in node order.
std::vector<double> regular_node_errors(const Matrix& pred, const Matrix& truth,
                                        const std::vector<bool>& regular);

}  // namespace wsnloc
