#pragma once

#include "batchlab/nn/tensor.hpp"

#include <functional>
#include <span>
#include <vector>

namespace batchlab::oracle {

struct GradientCheck {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::size_t checked = 0;
};

/// Compares `analytic` gradients against central differences of `loss` taken
/// by perturbing each element of `params` in place by ±step. The relative
/// error of one element is |a - n| / max(|a|, |n|, floor).
GradientCheck check_gradients(const std::function<double()>& loss, std::span<nn::Tensor* const> params,
                              std::span<const nn::Tensor> analytic, double step = 1e-5, double floor = 1e-7);

}  // namespace batchlab::oracle
