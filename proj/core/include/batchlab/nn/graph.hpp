#pragma once

#include "batchlab/nn/tensor.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace batchlab::nn {

/// Handle to a node recorded on a Graph.
struct Var {
  std::size_t id = 0;
};

/// Reverse-mode automatic differentiation tape over 2-D tensors.
///
/// Nodes are appended in evaluation order, so the tape is acyclic and already
/// topologically sorted. Every op checks that its output is finite and throws
/// NumericError otherwise. `backward` requires a single-element loss.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Constant leaf; no gradient is tracked for it.
  Var input(Tensor value);
  /// Differentiable leaf.
  Var param(Tensor value);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  /// Gradient of the last backward() loss with respect to `v`. Zero-filled if
  /// `v` did not influence the loss.
  const Tensor& grad(Var v);
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  void backward(Var loss);

  // Linear algebra.
  Var matmul(Var a, Var b);
  /// x·W + b with `b` a 1×out row broadcast over rows.
  Var affine(Var x, Var weight, Var bias);
  Var concat_cols(std::span<const Var> parts);

  // Elementwise, same shape.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);

  // Broadcasting. `row` is 1×C, `col` is R×1.
  Var add_row(Var a, Var row);
  Var mul_row(Var a, Var row);
  Var mul_col(Var a, Var col);

  Var scale(Var a, double c);
  Var shift(Var a, double c);
  Var relu(Var a);
  Var tanh(Var a);
  Var exp(Var a);
  Var square(Var a);
  /// Clamp with zero gradient outside [lo, hi].
  Var clamp(Var a, double lo, double hi);
  /// Asymmetric squared loss |tau - 1(x<0)| * x^2, elementwise.
  Var expectile(Var a, double tau);

  // Reductions.
  /// R×C -> R×1 row sums.
  Var sum_cols(Var a);
  Var sum(Var a);
  Var mean(Var a);

 private:
  using Backward = std::function<void(Graph&, std::size_t self)>;

  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    std::vector<std::size_t> parents;
    Backward backward;
  };

  Var record(Tensor value, std::vector<std::size_t> parents, Backward backward, const char* op);
  Tensor& grad_slot(std::size_t id);
  const Tensor& upstream(std::size_t id) const { return nodes_[id].grad; }
  bool wants(std::size_t id) const { return nodes_[id].requires_grad; }
  void require_same_shape(Var a, Var b, const char* op) const;

  std::vector<Node> nodes_;
};

}  // namespace batchlab::nn
