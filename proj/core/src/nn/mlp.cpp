#include "batchlab/nn/mlp.hpp"

#include "batchlab/common/error.hpp"

#include <cmath>

namespace batchlab::nn {

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw Error("unknown activation '" + name + "'");
}

MlpParams MlpParams::zeros(std::vector<std::size_t> layer_sizes, Activation activation) {
  if (layer_sizes.size() < 2) throw ShapeError("an MLP needs at least input and output sizes");
  MlpParams p;
  p.layer_sizes = std::move(layer_sizes);
  p.activation = activation;
  for (std::size_t l = 0; l + 1 < p.layer_sizes.size(); ++l) {
    if (p.layer_sizes[l] == 0 || p.layer_sizes[l + 1] == 0) throw ShapeError("zero-width MLP layer");
    p.weights.push_back(Tensor::matrix(p.layer_sizes[l], p.layer_sizes[l + 1]));
    p.biases.push_back(Tensor::matrix(1, p.layer_sizes[l + 1]));
  }
  return p;
}

MlpParams MlpParams::init(std::vector<std::size_t> layer_sizes, Activation activation, Rng& rng) {
  MlpParams p = zeros(std::move(layer_sizes), activation);
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const double fan_in = static_cast<double>(p.layer_sizes[l]);
    const double fan_out = static_cast<double>(p.layer_sizes[l + 1]);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& w : p.weights[l].values()) w = rng.uniform(-limit, limit);
  }
  return p;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) n += (layer_sizes[l] + 1) * layer_sizes[l + 1];
  return n;
}

std::vector<Tensor*> MlpParams::parameters() {
  std::vector<Tensor*> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(&weights[l]);
    out.push_back(&biases[l]);
  }
  return out;
}

std::vector<const Tensor*> MlpParams::parameters() const {
  std::vector<const Tensor*> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(&weights[l]);
    out.push_back(&biases[l]);
  }
  return out;
}

Tensor MlpParams::forward(const Tensor& input) const {
  if (input.cols() != input_dim())
    throw ShapeError("MLP expects input width " + std::to_string(input_dim()) + ", got " + input.shape_string());
  RowMatrix h = input.mat();
  for (std::size_t l = 0; l < weights.size(); ++l) {
    RowMatrix next = h * weights[l].mat();
    next.rowwise() += biases[l].mat().row(0);
    if (l + 1 < weights.size()) {
      if (activation == Activation::relu)
        next = next.cwiseMax(0.0);
      else
        next = next.array().tanh().matrix();
    }
    h = std::move(next);
  }
  Tensor out = Tensor::from_matrix(h);
  require_finite(out, "MLP forward");
  return out;
}

MlpBinding bind(Graph& g, const MlpParams& params) {
  MlpBinding b;
  b.activation = params.activation;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    b.weights.push_back(g.param(params.weights[l]));
    b.biases.push_back(g.param(params.biases[l]));
  }
  return b;
}

MlpBinding bind_frozen(Graph& g, const MlpParams& params) {
  MlpBinding b;
  b.activation = params.activation;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    b.weights.push_back(g.input(params.weights[l]));
    b.biases.push_back(g.input(params.biases[l]));
  }
  return b;
}

Var forward(Graph& g, const MlpBinding& net, Var input) {
  if (g.value(input).cols() != g.value(net.weights.front()).rows())
    throw ShapeError("MLP expects input width " + std::to_string(g.value(net.weights.front()).rows()) + ", got " +
                     g.value(input).shape_string());
  Var h = input;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    h = g.affine(h, net.weights[l], net.biases[l]);
    if (l + 1 < net.weights.size()) h = net.activation == Activation::relu ? g.relu(h) : g.tanh(h);
  }
  return h;
}

std::vector<Tensor> gradients(Graph& g, const MlpBinding& net) {
  std::vector<Tensor> out;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    out.push_back(g.grad(net.weights[l]));
    out.push_back(g.grad(net.biases[l]));
  }
  return out;
}

}  // namespace batchlab::nn
