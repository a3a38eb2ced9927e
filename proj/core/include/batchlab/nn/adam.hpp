#pragma once

#include "batchlab/nn/tensor.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace batchlab::nn {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::int64_t step = 0;

  /// Zero moments shaped like `params`.
  static AdamState for_params(std::span<const Tensor* const> params, AdamConfig config = {});
  static AdamState for_params(std::span<Tensor* const> params, AdamConfig config = {});
};

/// One bias-corrected Adam update applied in place. Throws ShapeError on
/// mismatched shapes and NumericError (before touching any state) if a gradient
/// is non-finite.
void adam_step(AdamState& state, std::span<Tensor* const> params, std::span<const Tensor> grads);

}  // namespace batchlab::nn
