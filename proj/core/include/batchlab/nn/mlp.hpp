#pragma once

#include "batchlab/common/rng.hpp"
#include "batchlab/nn/graph.hpp"
#include "batchlab/nn/tensor.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace batchlab::nn {

enum class Activation { relu, tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// Fully connected network. Hidden layers apply `activation`; the output layer is linear.
/// weights[l] is in×out, biases[l] is 1×out.
struct MlpParams {
  std::vector<std::size_t> layer_sizes;
  Activation activation = Activation::relu;
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;

  /// Glorot-uniform weights, zero biases.
  static MlpParams init(std::vector<std::size_t> layer_sizes, Activation activation, Rng& rng);
  static MlpParams zeros(std::vector<std::size_t> layer_sizes, Activation activation);

  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t output_dim() const { return layer_sizes.back(); }
  std::size_t num_layers() const { return weights.size(); }
  /// Sum over layers of (in + 1) * out.
  std::size_t parameter_count() const;

  /// Weights and biases interleaved per layer: W0, b0, W1, b1, ...
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;

  /// Batched inference; rows of `input` are samples.
  Tensor forward(const Tensor& input) const;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

/// Parameters of one MlpParams registered as differentiable leaves on a Graph.
struct MlpBinding {
  std::vector<Var> weights;
  std::vector<Var> biases;
  Activation activation = Activation::relu;
};

MlpBinding bind(Graph& g, const MlpParams& params);
/// Parameters registered as constants (no gradient), e.g. frozen target networks.
MlpBinding bind_frozen(Graph& g, const MlpParams& params);
Var forward(Graph& g, const MlpBinding& net, Var input);
/// Gradients after g.backward(), in MlpParams::parameters() order.
std::vector<Tensor> gradients(Graph& g, const MlpBinding& net);

}  // namespace batchlab::nn
