#include "wsnloc/tape.hpp"

#include <cmath>
#include <memory>

namespace wsnloc {

namespace {

void same_shape(const Matrix& a, const Matrix& b, std::string_view op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " +
                     shape_string(b));
  }
}

}  // namespace

Var Tape::push(Matrix value, bool requires_grad, Backward backward) {
  Node n;
  n.owned = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Matrix value) { return push(std::move(value), false, nullptr); }

Var Tape::input(Matrix value) { return push(std::move(value), true, nullptr); }

Var Tape::param(const ParameterSet& params, std::size_t index) {
  Node n;
  n.external = &params.value(index);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  Var v{static_cast<std::uint32_t>(nodes_.size() - 1)};
  bound_params_.emplace_back(v, index);
  return v;
}

const Matrix& Tape::value(Var v) const { return nodes_.at(v.id).value(); }

Matrix Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (n.has_grad) return n.grad;
  return Matrix::Zero(n.value().rows(), n.value().cols());
}

void Tape::accumulate(Var v, const Matrix& g) {
  Node& n = nodes_[v.id];
  if (!n.requires_grad) return;
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
  } else {
    n.grad += g;
  }
}

template <typename Expr>
void Tape::accumulate_expr(Var v, const Expr& g) {
  Node& n = nodes_[v.id];
  if (!n.requires_grad) return;
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
  } else {
    n.grad += g;
  }
}

void Tape::backward(Var loss) {
  const Matrix& v = value(loss);
  if (v.rows() != 1 || v.cols() != 1) {
    throw ShapeError("backward: loss must be scalar, got " + shape_string(v));
  }
  backward(loss, Matrix::Ones(1, 1));
}

void Tape::backward(Var out, const Matrix& seed) {
  same_shape(value(out), seed, "backward seed");
  for (auto& n : nodes_) {
    n.has_grad = false;
    n.grad.resize(0, 0);
  }
  accumulate(out, seed);
  for (std::size_t i = out.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backward) continue;
    n.backward(*this, n.grad);
  }
}

void Tape::accumulate_param_grads(Gradients& grads) const {
  for (const auto& [v, index] : bound_params_) {
    const Node& n = nodes_[v.id];
    if (n.has_grad) grads.at(index) += n.grad;
  }
}

Var Tape::matmul(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  if (A.cols() != B.rows()) {
    throw ShapeError("matmul: " + shape_string(A) + " * " + shape_string(B));
  }
  Matrix out = A * B;
  const bool rg = requires_grad(a) || requires_grad(b);
  return push(std::move(out), rg, [a, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(a)) t.accumulate_expr(a, g * t.value(b).transpose());
    if (t.requires_grad(b)) t.accumulate_expr(b, t.value(a).transpose() * g);
  });
}

Var Tape::matmul_bt(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  if (A.cols() != B.cols()) {
    throw ShapeError("matmul_bt: " + shape_string(A) + " * " + shape_string(B) + "^T");
  }
  Matrix out = A * B.transpose();
  const bool rg = requires_grad(a) || requires_grad(b);
  return push(std::move(out), rg, [a, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(a)) t.accumulate_expr(a, g * t.value(b));
    if (t.requires_grad(b)) t.accumulate_expr(b, g.transpose() * t.value(a));
  });
}

Var Tape::add(Var a, Var b) {
  same_shape(value(a), value(b), "add");
  Matrix out = value(a) + value(b);
  const bool rg = requires_grad(a) || requires_grad(b);
  return push(std::move(out), rg, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var Tape::sub(Var a, Var b) {
  same_shape(value(a), value(b), "sub");
  Matrix out = value(a) - value(b);
  const bool rg = requires_grad(a) || requires_grad(b);
  return push(std::move(out), rg, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate_expr(b, -g);
  });
}

Var Tape::add_row(Var a, Var row) {
  const Matrix& A = value(a);
  const Matrix& R = value(row);
  if (R.rows() != 1 || R.cols() != A.cols()) {
    throw ShapeError("add_row: " + shape_string(A) + " + row " + shape_string(R));
  }
  Matrix out = A.rowwise() + R.row(0);
  const bool rg = requires_grad(a) || requires_grad(row);
  return push(std::move(out), rg, [a, row](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    if (t.requires_grad(row)) t.accumulate_expr(row, g.colwise().sum());
  });
}

Var Tape::mul(Var a, Var b) {
  same_shape(value(a), value(b), "mul");
  Matrix out = value(a).cwiseProduct(value(b));
  const bool rg = requires_grad(a) || requires_grad(b);
  return push(std::move(out), rg, [a, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(a)) t.accumulate_expr(a, g.cwiseProduct(t.value(b)));
    if (t.requires_grad(b)) t.accumulate_expr(b, g.cwiseProduct(t.value(a)));
  });
}

Var Tape::mul_row(Var a, Var row) {
  const Matrix& A = value(a);
  const Matrix& R = value(row);
  if (R.rows() != 1 || R.cols() != A.cols()) {
    throw ShapeError("mul_row: " + shape_string(A) + " * row " + shape_string(R));
  }
  Matrix out = A.array().rowwise() * R.row(0).array();
  const bool rg = requires_grad(a) || requires_grad(row);
  return push(std::move(out), rg, [a, row](Tape& t, const Matrix& g) {
    if (t.requires_grad(a)) {
      t.accumulate_expr(a, (g.array().rowwise() * t.value(row).row(0).array()).matrix());
    }
    if (t.requires_grad(row)) {
      t.accumulate_expr(row, g.cwiseProduct(t.value(a)).colwise().sum());
    }
  });
}

Var Tape::scale(Var a, double s) {
  Matrix out = value(a) * s;
  return push(std::move(out), requires_grad(a),
              [a, s](Tape& t, const Matrix& g) { t.accumulate_expr(a, g * s); });
}

Var Tape::shift(Var a, double s) {
  Matrix out = value(a).array() + s;
  return push(std::move(out), requires_grad(a),
              [a](Tape& t, const Matrix& g) { t.accumulate(a, g); });
}

Var Tape::mask(Var a, const Matrix& m) {
  same_shape(value(a), m, "mask");
  Matrix out = value(a).cwiseProduct(m);
  auto keep = std::make_shared<Matrix>(m);
  return push(std::move(out), requires_grad(a), [a, keep](Tape& t, const Matrix& g) {
    t.accumulate_expr(a, g.cwiseProduct(*keep));
  });
}

Var Tape::sigmoid(Var a) {
  Matrix out = (1.0 + (-value(a).array()).exp()).inverse().matrix();
  const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
  return push(std::move(out), requires_grad(a), [a, self](Tape& t, const Matrix& g) {
    const auto& y = t.value(Var{self}).array();
    t.accumulate_expr(a, (g.array() * y * (1.0 - y)).matrix());
  });
}

Var Tape::tanh(Var a) {
  Matrix out = value(a).array().tanh().matrix();
  const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
  return push(std::move(out), requires_grad(a), [a, self](Tape& t, const Matrix& g) {
    const auto& y = t.value(Var{self}).array();
    t.accumulate_expr(a, (g.array() * (1.0 - y.square())).matrix());
  });
}

Var Tape::relu(Var a) {
  Matrix out = value(a).cwiseMax(0.0);
  return push(std::move(out), requires_grad(a), [a](Tape& t, const Matrix& g) {
    t.accumulate_expr(a, (t.value(a).array() > 0.0).select(g, 0.0).matrix());
  });
}

Var Tape::row_softmax(Var a) {
  const Matrix& A = value(a);
  Matrix out(A.rows(), A.cols());
  for (Index i = 0; i < A.rows(); ++i) {
    const double mx = A.row(i).maxCoeff();
    out.row(i) = (A.row(i).array() - mx).exp();
    out.row(i) /= out.row(i).sum();
  }
  const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
  return push(std::move(out), requires_grad(a), [a, self](Tape& t, const Matrix& g) {
    const Matrix& y = t.value(Var{self});
    Matrix dx(y.rows(), y.cols());
    for (Index i = 0; i < y.rows(); ++i) {
      const double dot = g.row(i).dot(y.row(i));
      dx.row(i) = y.row(i).cwiseProduct((g.row(i).array() - dot).matrix());
    }
    t.accumulate(a, dx);
  });
}

Var Tape::sum(Var a) {
  Matrix out(1, 1);
  out(0, 0) = value(a).sum();
  return push(std::move(out), requires_grad(a), [a](Tape& t, const Matrix& g) {
    const Matrix& x = t.value(a);
    t.accumulate_expr(a, Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
  });
}

Var Tape::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const Index rows = value(parts[0]).rows();
  Index cols = 0;
  bool rg = false;
  for (Var p : parts) {
    if (value(p).rows() != rows) throw ShapeError("concat_cols: row count mismatch");
    cols += value(p).cols();
    rg = rg || requires_grad(p);
  }
  Matrix out(rows, cols);
  Index c = 0;
  for (Var p : parts) {
    out.middleCols(c, value(p).cols()) = value(p);
    c += value(p).cols();
  }
  std::vector<Var> ins(parts.begin(), parts.end());
  return push(std::move(out), rg, [ins](Tape& t, const Matrix& g) {
    Index c0 = 0;
    for (Var p : ins) {
      const Index w = t.value(p).cols();
      if (t.requires_grad(p)) t.accumulate_expr(p, g.middleCols(c0, w));
      c0 += w;
    }
  });
}

Var Tape::concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const Index cols = value(parts[0]).cols();
  Index rows = 0;
  bool rg = false;
  for (Var p : parts) {
    if (value(p).cols() != cols) throw ShapeError("concat_rows: column count mismatch");
    rows += value(p).rows();
    rg = rg || requires_grad(p);
  }
  Matrix out(rows, cols);
  Index r = 0;
  for (Var p : parts) {
    out.middleRows(r, value(p).rows()) = value(p);
    r += value(p).rows();
  }
  std::vector<Var> ins(parts.begin(), parts.end());
  return push(std::move(out), rg, [ins](Tape& t, const Matrix& g) {
    Index r0 = 0;
    for (Var p : ins) {
      const Index h = t.value(p).rows();
      if (t.requires_grad(p)) t.accumulate_expr(p, g.middleRows(r0, h));
      r0 += h;
    }
  });
}

Var Tape::slice_cols(Var a, Index begin, Index count) {
  const Matrix& A = value(a);
  if (begin < 0 || count < 0 || begin + count > A.cols()) {
    throw ShapeError("slice_cols out of range on " + shape_string(A));
  }
  Matrix out = A.middleCols(begin, count);
  return push(std::move(out), requires_grad(a), [a, begin, count](Tape& t, const Matrix& g) {
    Matrix full = Matrix::Zero(t.value(a).rows(), t.value(a).cols());
    full.middleCols(begin, count) = g;
    t.accumulate(a, full);
  });
}

Var Tape::slice_rows(Var a, Index begin, Index count) {
  const Matrix& A = value(a);
  if (begin < 0 || count < 0 || begin + count > A.rows()) {
    throw ShapeError("slice_rows out of range on " + shape_string(A));
  }
  Matrix out = A.middleRows(begin, count);
  return push(std::move(out), requires_grad(a), [a, begin, count](Tape& t, const Matrix& g) {
    Matrix full = Matrix::Zero(t.value(a).rows(), t.value(a).cols());
    full.middleRows(begin, count) = g;
    t.accumulate(a, full);
  });
}

Var Tape::neighbor_attention(Var q, Var k, Var v, const NeighborLists& nb, double scale,
                             std::vector<double>* coefficients) {
  const Matrix& Q = value(q);
  const Matrix& K = value(k);
  const Matrix& V = value(v);
  const Index n = Q.rows();
  if (nb.node_count() != n || K.rows() != n || V.rows() != n || K.cols() != Q.cols()) {
    throw ShapeError("neighbor_attention: inconsistent shapes Q" + shape_string(Q) + " K" +
                     shape_string(K) + " V" + shape_string(V) + " for " +
                     std::to_string(nb.node_count()) + " nodes");
  }
  auto beta = std::make_shared<std::vector<double>>(nb.edge_entries());
  Matrix out = Matrix::Zero(n, V.cols());
  for (Index i = 0; i < n; ++i) {
    const int b = nb.offsets[i], e = nb.offsets[i + 1];
    if (b == e) continue;
    double mx = -INFINITY;
    for (int p = b; p < e; ++p) {
      const double s = scale * Q.row(i).dot(K.row(nb.cols[p]));
      (*beta)[p] = s;
      mx = std::max(mx, s);
    }
    double z = 0.0;
    for (int p = b; p < e; ++p) z += ((*beta)[p] = std::exp((*beta)[p] - mx));
    for (int p = b; p < e; ++p) {
      (*beta)[p] /= z;
      out.row(i) += (*beta)[p] * V.row(nb.cols[p]);
    }
  }
  if (coefficients) *coefficients = *beta;
  const bool rg = requires_grad(q) || requires_grad(k) || requires_grad(v);
  const NeighborLists* lists = &nb;
  return push(std::move(out), rg, [q, k, v, lists, beta, scale](Tape& t, const Matrix& g) {
    const Matrix& Q = t.value(q);
    const Matrix& K = t.value(k);
    const Matrix& V = t.value(v);
    Matrix dQ = Matrix::Zero(Q.rows(), Q.cols());
    Matrix dK = Matrix::Zero(K.rows(), K.cols());
    Matrix dV = Matrix::Zero(V.rows(), V.cols());
    std::vector<double> dbeta;
    for (Index i = 0; i < Q.rows(); ++i) {
      const int b = lists->offsets[i], e = lists->offsets[i + 1];
      if (b == e) continue;
      dbeta.assign(static_cast<std::size_t>(e - b), 0.0);
      double weighted = 0.0;
      for (int p = b; p < e; ++p) {
        const int j = lists->cols[p];
        dbeta[p - b] = g.row(i).dot(V.row(j));
        weighted += (*beta)[p] * dbeta[p - b];
        dV.row(j) += (*beta)[p] * g.row(i);
      }
      for (int p = b; p < e; ++p) {
        const int j = lists->cols[p];
        const double ds = scale * (*beta)[p] * (dbeta[p - b] - weighted);
        dQ.row(i) += ds * K.row(j);
        dK.row(j) += ds * Q.row(i);
      }
    }
    t.accumulate(q, dQ);
    t.accumulate(k, dK);
    t.accumulate(v, dV);
  });
}

Var Tape::batch_norm(Var x, Var gamma, Var delta, double epsilon, Matrix* batch_mean,
                     Matrix* batch_var) {
  const Matrix& X = value(x);
  const Index m = X.rows();
  if (m < 2) throw ShapeError("batch_norm: training batch needs at least 2 rows");
  expect_shape(value(gamma), 1, X.cols(), "batch_norm gamma");
  expect_shape(value(delta), 1, X.cols(), "batch_norm delta");
  const Matrix mean = X.colwise().mean();
  const Matrix centered = X.rowwise() - mean.row(0);
  const Matrix var = centered.cwiseProduct(centered).colwise().mean();
  const Matrix inv_std = (var.array() + epsilon).rsqrt().matrix();
  auto xhat = std::make_shared<Matrix>(centered.array().rowwise() * inv_std.row(0).array());
  Matrix out = (xhat->array().rowwise() * value(gamma).row(0).array()).rowwise() +
               value(delta).row(0).array();
  if (batch_mean) *batch_mean = mean;
  if (batch_var) *batch_var = var;
  const bool rg = requires_grad(x) || requires_grad(gamma) || requires_grad(delta);
  return push(std::move(out), rg, [x, gamma, delta, xhat, inv_std](Tape& t, const Matrix& g) {
    const double rows = static_cast<double>(g.rows());
    if (t.requires_grad(gamma)) t.accumulate_expr(gamma, g.cwiseProduct(*xhat).colwise().sum());
    if (t.requires_grad(delta)) t.accumulate_expr(delta, g.colwise().sum());
    if (t.requires_grad(x)) {
      const Matrix dxhat = g.array().rowwise() * t.value(gamma).row(0).array();
      const Matrix sum_d = dxhat.colwise().sum();
      const Matrix sum_dx = dxhat.cwiseProduct(*xhat).colwise().sum();
      Matrix dx = (rows * dxhat.array()).rowwise() - sum_d.row(0).array();
      dx.array() -= xhat->array().rowwise() * sum_dx.row(0).array();
      dx.array().rowwise() *= (inv_std.row(0).array() / rows);
      t.accumulate(x, dx);
    }
  });
}

}  // namespace wsnloc
