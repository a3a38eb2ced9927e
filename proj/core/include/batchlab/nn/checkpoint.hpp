#pragma once

#include "batchlab/nn/mlp.hpp"
#include "batchlab/nn/tensor.hpp"

#include <iosfwd>

namespace batchlab::nn {

// Binary network record, all integers and floats little-endian:
//
//   char[4]  magic "BLNN"
//   u32      format version (1)
//   u32      activation (0 = relu, 1 = tanh)
//   u32      L, number of layer sizes
//   u64[L]   layer sizes
//   per layer l = 0..L-2:
//     f64[in*out]  weights, row-major (in rows, out columns)
//     f64[out]     biases
//
// Records can be concatenated; readers consume exactly one record per call.

void write_mlp(std::ostream& out, const MlpParams& params);
MlpParams read_mlp(std::istream& in);

/// Shape-prefixed tensor record: u32 rank, u64[rank] dims, f64 values.
void write_tensor(std::ostream& out, const Tensor& t);
Tensor read_tensor(std::istream& in);

}  // namespace batchlab::nn
