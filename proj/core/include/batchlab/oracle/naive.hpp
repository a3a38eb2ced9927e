#pragma once

#include "batchlab/nn/mlp.hpp"

#include <vector>

namespace batchlab::oracle {

/// Per-neuron scalar loops, no matrix library. Reference for MlpParams::forward.
std::vector<double> naive_mlp_forward(const nn::MlpParams& params, const std::vector<double>& input);

}  // namespace batchlab::oracle
