#include "batchlab/oracle/naive.hpp"

#include <cmath>

namespace batchlab::oracle {

std::vector<double> naive_mlp_forward(const nn::MlpParams& params, const std::vector<double>& input) {
  std::vector<double> h = input;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const std::size_t in = params.layer_sizes[l];
    const std::size_t out = params.layer_sizes[l + 1];
    std::vector<double> next(out, 0.0);
    for (std::size_t j = 0; j < out; ++j) {
      double acc = params.biases[l][j];
      for (std::size_t i = 0; i < in; ++i) acc += h[i] * params.weights[l][i * out + j];
      if (l + 1 < params.weights.size())
        acc = params.activation == nn::Activation::relu ? (acc > 0.0 ? acc : 0.0) : std::tanh(acc);
      next[j] = acc;
    }
    h = std::move(next);
  }
  return h;
}

}  // namespace batchlab::oracle
