#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "wsnloc/numcore.hpp"

namespace wsnloc {

/// Handle to a value recorded on a Tape.
struct Var {
  std::uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
};

/// Reverse-mode differentiation over a linear record of matrix primitives.
///
/// Every operation evaluates eagerly and appends one node. Nodes are
/// topologically ordered by construction, so backward() is a single reverse
/// sweep. A node only records a backward closure when at least one input
/// requires a gradient; constant-only subgraphs cost nothing extra.
///
/// A Tape is single-threaded. Independent tapes may run concurrently.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  // Leaves.
  Var constant(Matrix value);
  Var input(Matrix value);  // requires a gradient, not bound to a parameter
  /// Binds params.value(index) without copying; `params` must outlive the tape.
  Var param(const ParameterSet& params, std::size_t index);
  Var param(const ParameterSet& params, std::string_view name) {
    return param(params, params.index_of(name));
  }

  const Matrix& value(Var v) const;
  /// Gradient accumulated by the last backward(); zeros if never reached.
  Matrix grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Seeds d(loss)/d(loss) = 1; rejects non-scalar losses.
  void backward(Var loss);
  /// Seeds an arbitrary upstream gradient shaped like `out`.
  void backward(Var out, const Matrix& seed);

  /// Adds the gradient of every bound parameter into grads[index].
  void accumulate_param_grads(Gradients& grads) const;

  // Primitives.
  Var matmul(Var a, Var b);     // a * b
  Var matmul_bt(Var a, Var b);  // a * b^T
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var add_row(Var a, Var row);  // broadcasts a 1 x c row over every row of a
  Var mul(Var a, Var b);        // elementwise
  Var mul_row(Var a, Var row);  // scales every row of a elementwise by a 1 x c row
  Var scale(Var a, double s);
  Var shift(Var a, double s);
  Var mask(Var a, const Matrix& m);  // elementwise product with a constant
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var relu(Var a);
  Var row_softmax(Var a);
  Var sum(Var a);
  Var concat_cols(std::span<const Var> parts);
  Var concat_rows(std::span<const Var> parts);
  Var slice_cols(Var a, Index begin, Index count);
  Var slice_rows(Var a, Index begin, Index count);

  /// Per-row softmax of scale * q_i . k_j over j in neighbors(i), then
  /// out_i = sum_j beta_ij v_j. Rows without neighbors produce zeros.
  /// When `coefficients` is non-null it receives beta in neighbor-list order.
  Var neighbor_attention(Var q, Var k, Var v, const NeighborLists& neighbors, double scale,
                         std::vector<double>* coefficients = nullptr);

  /// Training-mode batch normalization over rows with population variance.
  /// Batch statistics are written to the optional outputs.
  Var batch_norm(Var x, Var gamma, Var delta, double epsilon, Matrix* batch_mean = nullptr,
                 Matrix* batch_var = nullptr);

 private:
  using Backward = std::function<void(Tape&, const Matrix& out_grad)>;

  struct Node {
    Matrix owned;
    const Matrix* external = nullptr;
    Matrix grad;
    bool requires_grad = false;
    bool has_grad = false;
    Backward backward;
    const Matrix& value() const { return external ? *external : owned; }
  };

  Var push(Matrix value, bool requires_grad, Backward backward);
  void accumulate(Var v, const Matrix& g);
  template <typename Expr>
  void accumulate_expr(Var v, const Expr& g);

  std::vector<Node> nodes_;
  std::vector<std::pair<Var, std::size_t>> bound_params_;
};

}  // namespace wsnloc
