#pragma once

#include "batchlab/nn/tensor.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace batchlab::policy {

enum class PolicyClass { gaussian, diffusion };
std::string to_string(PolicyClass c);
PolicyClass policy_class_from_string(const std::string& name);

/// Per-dimension box of valid actions; maps to and from the unit box [-1,1].
struct ActionBounds {
  std::vector<double> low;
  std::vector<double> high;

  std::size_t dim() const { return low.size(); }
  double normalize(double a, std::size_t d) const { return 2.0 * (a - low[d]) / (high[d] - low[d]) - 1.0; }
  double denormalize(double u, std::size_t d) const { return low[d] + (u + 1.0) * 0.5 * (high[d] - low[d]); }
  double clip(double a, std::size_t d) const;

  friend bool operator==(const ActionBounds&, const ActionBounds&) = default;
};

/// Stochastic actor over continuous actions. Sampling is a pure function of
/// (parameters, state, seed), so one frozen policy can serve many concurrent readers.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::size_t state_dim() const = 0;
  virtual const ActionBounds& bounds() const = 0;
  std::size_t action_dim() const { return bounds().dim(); }

  /// `n` actions for `state`, one per row, clipped to bounds.
  virtual nn::Tensor sample(std::span<const double> state, std::size_t n, std::uint64_t seed) const = 0;
};

}  // namespace batchlab::policy
