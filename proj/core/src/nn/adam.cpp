#include "batchlab/nn/adam.hpp"

#include "batchlab/common/error.hpp"

#include <cmath>

namespace batchlab::nn {

AdamState AdamState::for_params(std::span<const Tensor* const> params, AdamConfig config) {
  AdamState s;
  s.config = config;
  for (const Tensor* p : params) {
    s.first_moment.emplace_back(p->shape(), 0.0);
    s.second_moment.emplace_back(p->shape(), 0.0);
  }
  return s;
}

AdamState AdamState::for_params(std::span<Tensor* const> params, AdamConfig config) {
  std::vector<const Tensor*> view(params.begin(), params.end());
  return for_params(std::span<const Tensor* const>(view), config);
}

void adam_step(AdamState& state, std::span<Tensor* const> params, std::span<const Tensor> grads) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size())
    throw ShapeError("adam_step: parameter, gradient and moment counts differ");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->same_shape(grads[i]) || !params[i]->same_shape(state.first_moment[i]))
      throw ShapeError("adam_step: shape mismatch at parameter " + std::to_string(i));
    require_finite(grads[i], "adam_step gradient");
  }
  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(c.beta1, t);
  const double bias2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    MatrixMap m = state.first_moment[i].mat();
    MatrixMap v = state.second_moment[i].mat();
    const ConstMatrixMap g = grads[i].mat();
    MatrixMap p = params[i]->mat();
    m.array() = c.beta1 * m.array() + (1.0 - c.beta1) * g.array();
    v.array() = c.beta2 * v.array() + (1.0 - c.beta2) * g.array().square();
    p.array() -= c.lr * (m.array() / bias1) / ((v.array() / bias2).sqrt() + c.eps);
  }
}

}  // namespace batchlab::nn
