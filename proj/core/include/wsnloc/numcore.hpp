#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace wsnloc {

/// Dense row-major matrix; the only tensor rank the model needs.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

/// Train mode enables dropout and batch statistics; eval mode is deterministic.
enum class Mode { Train, Eval };

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string shape_string(const Matrix& m);

/// Throws ShapeError unless `m` is rows x cols.
void expect_shape(const Matrix& m, Index rows, Index cols, std::string_view what);

/// Compressed neighbor lists: neighbors of node i are
/// cols[offsets[i]] .. cols[offsets[i+1]-1], sorted ascending.
struct NeighborLists {
  std::vector<int> offsets{0};
  std::vector<int> cols;

  int node_count() const { return static_cast<int>(offsets.size()) - 1; }
  int degree(int i) const { return offsets[i + 1] - offsets[i]; }
  std::size_t edge_entries() const { return cols.size(); }

  /// Builds symmetric lists from an undirected edge list over `n` nodes.
  static NeighborLists from_edges(int n, const std::vector<std::pair<int, int>>& edges);
};

/// Named, ordered collection of learnable matrices.
class ParameterSet {
 public:
  std::size_t add(std::string name, Matrix value);

  std::size_t size() const { return values_.size(); }
  std::size_t index_of(std::string_view name) const;
  bool contains(std::string_view name) const;

  const std::string& name(std::size_t i) const { return names_[i]; }
  Matrix& value(std::size_t i) { return values_[i]; }
  const Matrix& value(std::size_t i) const { return values_[i]; }
  Matrix& operator[](std::string_view name) { return values_[index_of(name)]; }
  const Matrix& operator[](std::string_view name) const { return values_[index_of(name)]; }

  std::size_t scalar_count() const;

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Gradients aligned index-for-index with a ParameterSet.
using Gradients = std::vector<Matrix>;

Gradients zero_gradients(const ParameterSet& params);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
};

/// Bias-corrected Adam update; lazily sizes the moment accumulators.
void adam_step(ParameterSet& params, const Gradients& grads, AdamState& state);

/// Central differences, one coordinate at a time: (f(p+h) - f(p-h)) / 2h
/// with `points` = 2, or the fourth-order stencil
/// (-f(p+2h) + 8f(p+h) - 8f(p-h) + f(p-2h)) / 12h with `points` = 4.
/// `f` must be a pure function of the parameter values it is handed.
Gradients finite_diff_grad(const std::function<double(const ParameterSet&)>& f,
                           const ParameterSet& params, double h, int points = 2);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  Index worst_offset = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// |a - n| / max(|a|, |n|, floor) maximized over every coordinate.
GradCheckResult compare_gradients(const ParameterSet& params, const Gradients& analytic,
                                  const Gradients& numeric, double floor = 1e-6);

// Checkpoint map: {"format_version", "params": {name: {"shape", "values"}}}.
inline constexpr int kCheckpointFormatVersion = 1;

nlohmann::json parameters_to_json(const ParameterSet& params);
ParameterSet parameters_from_json(const nlohmann::json& j);

}  // namespace wsnloc
