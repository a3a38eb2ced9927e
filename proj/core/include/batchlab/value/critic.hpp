#pragma once

#include "batchlab/nn/tensor.hpp"

#include <span>

namespace batchlab::value {

/// Read-only action-value interface used for best-of-N selection and AWR weights.
class Critic {
 public:
  virtual ~Critic() = default;

  /// Q(s_i, a_i) for paired rows, returned as B×1.
  virtual nn::Tensor q(const nn::Tensor& states, const nn::Tensor& actions) const = 0;
  /// V(s_i), B×1.
  virtual nn::Tensor v(const nn::Tensor& states) const = 0;

  /// Q(state, a_i) for every row of `actions`.
  nn::Tensor q_for_state(std::span<const double> state, const nn::Tensor& actions) const;
};

}  // namespace batchlab::value
