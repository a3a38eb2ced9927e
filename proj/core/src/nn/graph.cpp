#include "batchlab/nn/graph.hpp"

#include "batchlab/common/error.hpp"

#include <cmath>
#include <string>

namespace batchlab::nn {

namespace {

Tensor like(const Tensor& t) { return Tensor(t.shape(), 0.0); }

std::string op_error(const char* op, const Tensor& a, const Tensor& b) {
  return std::string(op) + ": incompatible shapes " + a.shape_string() + " and " + b.shape_string();
}

}  // namespace

Var Graph::input(Tensor value) {
  require_finite(value, "graph input");
  nodes_.push_back(Node{std::move(value), {}, false, false, {}, {}});
  return Var{nodes_.size() - 1};
}

Var Graph::param(Tensor value) {
  require_finite(value, "graph parameter");
  nodes_.push_back(Node{std::move(value), {}, true, false, {}, {}});
  return Var{nodes_.size() - 1};
}

Var Graph::record(Tensor value, std::vector<std::size_t> parents, Backward backward, const char* op) {
  require_finite(value, op);
  bool needs = false;
  for (auto p : parents) needs = needs || nodes_[p].requires_grad;
  nodes_.push_back(Node{std::move(value), {}, needs, false, std::move(parents), needs ? std::move(backward) : Backward{}});
  return Var{nodes_.size() - 1};
}

Tensor& Graph::grad_slot(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = like(n.value);
    n.has_grad = true;
  }
  return n.grad;
}

const Tensor& Graph::grad(Var v) { return grad_slot(v.id); }

void Graph::require_same_shape(Var a, Var b, const char* op) const {
  if (!value(a).same_shape(value(b))) throw ShapeError(op_error(op, value(a), value(b)));
}

void Graph::backward(Var loss) {
  if (value(loss).size() != 1) throw ShapeError("backward requires a scalar loss, got " + value(loss).shape_string());
  for (auto& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
  grad_slot(loss.id)[0] = 1.0;
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.backward) continue;
    n.backward(*this, id);
  }
}

Var Graph::matmul(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.cols() != B.rows()) throw ShapeError(op_error("matmul", A, B));
  Tensor out = Tensor::matrix(A.rows(), B.cols());
  out.mat().noalias() = A.mat() * B.mat();
  return record(std::move(out), {a.id, b.id}, [a, b](Graph& g, std::size_t self) {
    const ConstMatrixMap G = g.upstream(self).mat();
    if (g.wants(a.id)) g.grad_slot(a.id).mat().noalias() += G * g.value(b).mat().transpose();
    if (g.wants(b.id)) g.grad_slot(b.id).mat().noalias() += g.value(a).mat().transpose() * G;
  }, "matmul");
}

Var Graph::affine(Var x, Var weight, Var bias) {
  const Tensor& X = value(x);
  const Tensor& W = value(weight);
  const Tensor& B = value(bias);
  if (X.cols() != W.rows() || B.rows() != 1 || B.cols() != W.cols()) throw ShapeError(op_error("affine", X, W));
  Tensor out = Tensor::matrix(X.rows(), W.cols());
  out.mat().noalias() = X.mat() * W.mat();
  out.mat().rowwise() += B.mat().row(0);
  return record(std::move(out), {x.id, weight.id, bias.id}, [x, weight, bias](Graph& g, std::size_t self) {
    const ConstMatrixMap G = g.upstream(self).mat();
    if (g.wants(x.id)) g.grad_slot(x.id).mat().noalias() += G * g.value(weight).mat().transpose();
    if (g.wants(weight.id)) g.grad_slot(weight.id).mat().noalias() += g.value(x).mat().transpose() * G;
    if (g.wants(bias.id)) g.grad_slot(bias.id).mat().row(0) += G.colwise().sum();
  }, "affine");
}

Var Graph::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = value(parts[0]).rows();
  std::size_t cols = 0;
  for (auto p : parts) {
    if (value(p).rows() != rows) throw ShapeError(op_error("concat_cols", value(parts[0]), value(p)));
    cols += value(p).cols();
  }
  Tensor out = Tensor::matrix(rows, cols);
  std::vector<std::size_t> ids;
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (auto p : parts) {
    const auto c = static_cast<Eigen::Index>(value(p).cols());
    out.mat().middleCols(static_cast<Eigen::Index>(off), c) = value(p).mat();
    ids.push_back(p.id);
    offsets.push_back(off);
    off += value(p).cols();
  }
  return record(std::move(out), ids, [ids, offsets](Graph& g, std::size_t self) {
    const ConstMatrixMap G = g.upstream(self).mat();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (!g.wants(ids[i])) continue;
      const auto c = static_cast<Eigen::Index>(g.value(Var{ids[i]}).cols());
      g.grad_slot(ids[i]).mat() += G.middleCols(static_cast<Eigen::Index>(offsets[i]), c);
    }
  }, "concat_cols");
}

Var Graph::add(Var a, Var b) {
  require_same_shape(a, b, "add");
  Tensor out = value(a);
  out.mat() += value(b).mat();
  return record(std::move(out), {a.id, b.id}, [a, b](Graph& g, std::size_t self) {
    if (g.wants(a.id)) g.grad_slot(a.id).mat() += g.upstream(self).mat();
    if (g.wants(b.id)) g.grad_slot(b.id).mat() += g.upstream(self).mat();
  }, "add");
}

Var Graph::sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  Tensor out = value(a);
  out.mat() -= value(b).mat();
  return record(std::move(out), {a.id, b.id}, [a, b](Graph& g, std::size_t self) {
    if (g.wants(a.id)) g.grad_slot(a.id).mat() += g.upstream(self).mat();
    if (g.wants(b.id)) g.grad_slot(b.id).mat() -= g.upstream(self).mat();
  }, "sub");
}

Var Graph::mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  Tensor out = value(a);
  out.mat().array() *= value(b).mat().array();
  return record(std::move(out), {a.id, b.id}, [a, b](Graph& g, std::size_t self) {
    const ConstMatrixMap G = g.upstream(self).mat();
    if (g.wants(a.id)) g.grad_slot(a.id).mat().array() += G.array() * g.value(b).mat().array();
    if (g.wants(b.id)) g.grad_slot(b.id).mat().array() += G.array() * g.value(a).mat().array();
  }, "mul");
}

Var Graph::add_row(Var a, Var row) {
  const Tensor& A = value(a);
  const Tensor& R = value(row);
  if (R.rows() != 1 || R.cols() != A.cols()) throw ShapeError(op_error("add_row", A, R));
  Tensor out = A;
  out.mat().rowwise() += R.mat().row(0);
  return record(std::move(out), {a.id, row.id}, [a, row](Graph& g, std::size_t self) {
    const ConstMatrixMap G = g.upstream(self).mat();
    if (g.wants(a.id)) g.grad_slot(a.id).mat() += G;
    if (g.wants(row.id)) g.grad_slot(row.id).mat().row(0) += G.colwise().sum();
  }, "add_row");
}

Var Graph::mul_row(Var a, Var row) {
  const Tensor& A = value(a);
  const Tensor& R = value(row);
  if (R.rows() != 1 || R.cols() != A.cols()) throw ShapeError(op_error("mul_row", A, R));
  Tensor out = A;
  out.mat().array().rowwise() *= R.mat().row(0).array();
  return record(std::move(out), {a.id, row.id}, [a, row](Graph& g, std::size_t self) {
    const ConstMatrixMap G = g.upstream(self).mat();
    if (g.wants(a.id)) g.grad_slot(a.id).mat().array() += G.array().rowwise() * g.value(row).mat().row(0).array();
    if (g.wants(row.id)) g.grad_slot(row.id).mat().row(0).array() += (G.array() * g.value(a).mat().array()).colwise().sum();
  }, "mul_row");
}

Var Graph::mul_col(Var a, Var col) {
  const Tensor& A = value(a);
  const Tensor& C = value(col);
  if (C.cols() != 1 || C.rows() != A.rows()) throw ShapeError(op_error("mul_col", A, C));
  Tensor out = A;
  out.mat().array().colwise() *= C.mat().col(0).array();
  return record(std::move(out), {a.id, col.id}, [a, col](Graph& g, std::size_t self) {
    const ConstMatrixMap G = g.upstream(self).mat();
    if (g.wants(a.id)) g.grad_slot(a.id).mat().array() += G.array().colwise() * g.value(col).mat().col(0).array();
    if (g.wants(col.id)) g.grad_slot(col.id).mat().col(0).array() += (G.array() * g.value(a).mat().array()).rowwise().sum();
  }, "mul_col");
}

Var Graph::scale(Var a, double c) {
  Tensor out = value(a);
  out.mat() *= c;
  return record(std::move(out), {a.id}, [a, c](Graph& g, std::size_t self) {
    g.grad_slot(a.id).mat() += c * g.upstream(self).mat();
  }, "scale");
}

Var Graph::shift(Var a, double c) {
  Tensor out = value(a);
  out.mat().array() += c;
  return record(std::move(out), {a.id}, [a](Graph& g, std::size_t self) {
    g.grad_slot(a.id).mat() += g.upstream(self).mat();
  }, "shift");
}

Var Graph::relu(Var a) {
  Tensor out = value(a);
  out.mat() = out.mat().cwiseMax(0.0);
  return record(std::move(out), {a.id}, [a](Graph& g, std::size_t self) {
    g.grad_slot(a.id).mat().array() +=
        (g.value(a).mat().array() > 0.0).select(g.upstream(self).mat().array(), 0.0);
  }, "relu");
}

Var Graph::tanh(Var a) {
  Tensor out = value(a);
  out.mat() = out.mat().array().tanh().matrix();
  return record(std::move(out), {a.id}, [a](Graph& g, std::size_t self) {
    const ConstMatrixMap y = g.value(Var{self}).mat();
    g.grad_slot(a.id).mat().array() += g.upstream(self).mat().array() * (1.0 - y.array().square());
  }, "tanh");
}

Var Graph::exp(Var a) {
  Tensor out = value(a);
  out.mat() = out.mat().array().exp().matrix();
  return record(std::move(out), {a.id}, [a](Graph& g, std::size_t self) {
    g.grad_slot(a.id).mat().array() += g.upstream(self).mat().array() * g.value(Var{self}).mat().array();
  }, "exp");
}

Var Graph::square(Var a) {
  Tensor out = value(a);
  out.mat() = out.mat().array().square().matrix();
  return record(std::move(out), {a.id}, [a](Graph& g, std::size_t self) {
    g.grad_slot(a.id).mat().array() += 2.0 * g.upstream(self).mat().array() * g.value(a).mat().array();
  }, "square");
}

Var Graph::clamp(Var a, double lo, double hi) {
  Tensor out = value(a);
  out.mat() = out.mat().cwiseMax(lo).cwiseMin(hi);
  return record(std::move(out), {a.id}, [a, lo, hi](Graph& g, std::size_t self) {
    const ConstMatrixMap x = g.value(a).mat();
    g.grad_slot(a.id).mat().array() += ((x.array() >= lo) && (x.array() <= hi)).select(g.upstream(self).mat().array(), 0.0);
  }, "clamp");
}

Var Graph::expectile(Var a, double tau) {
  Tensor out = value(a);
  MatrixMap x = out.mat();
  x.array() = (tau + (1.0 - 2.0 * tau) * (x.array() < 0.0).cast<double>()) * x.array().square();
  return record(std::move(out), {a.id}, [a, tau](Graph& g, std::size_t self) {
    const ConstMatrixMap xa = g.value(a).mat();
    g.grad_slot(a.id).mat().array() += g.upstream(self).mat().array() * 2.0 * (tau + (1.0 - 2.0 * tau) * (xa.array() < 0.0).cast<double>()) * xa.array();
  }, "expectile");
}

Var Graph::sum_cols(Var a) {
  const Tensor& A = value(a);
  Tensor out = Tensor::matrix(A.rows(), 1);
  out.mat().col(0) = A.mat().rowwise().sum();
  return record(std::move(out), {a.id}, [a](Graph& g, std::size_t self) {
    g.grad_slot(a.id).mat().colwise() += g.upstream(self).mat().col(0);
  }, "sum_cols");
}

Var Graph::sum(Var a) {
  Tensor out = Tensor::scalar(value(a).mat().sum());
  return record(std::move(out), {a.id}, [a](Graph& g, std::size_t self) {
    g.grad_slot(a.id).mat().array() += g.upstream(self)[0];
  }, "sum");
}

Var Graph::mean(Var a) {
  const double n = static_cast<double>(value(a).size());
  Tensor out = Tensor::scalar(value(a).mat().sum() / n);
  return record(std::move(out), {a.id}, [a, n](Graph& g, std::size_t self) {
    g.grad_slot(a.id).mat().array() += g.upstream(self)[0] / n;
  }, "mean");
}

}  // namespace batchlab::nn
