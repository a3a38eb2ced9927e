#pragma once

#include "batchlab/common/rng.hpp"
#include "batchlab/nn/mlp.hpp"
#include "batchlab/policy/gaussian.hpp"
#include "batchlab/policy/policy.hpp"

#include <memory>
#include <vector>

namespace batchlab::policy {

/// Architecture and supervised-training settings shared by both policy classes.
struct PolicyConfig {
  PolicyClass policy_class = PolicyClass::diffusion;
  std::vector<std::size_t> hidden{64, 64};
  nn::Activation activation = nn::Activation::relu;

  int diffusion_steps = 100;
  double beta_start = 1e-4;
  double beta_end = 2e-2;
  bool clip_x0 = true;

  SampleMode gaussian_mode = SampleMode::mean;
  double init_log_std = 0.0;

  double lr = 3e-4;
  std::size_t batch_size = 256;
  /// Gradient steps per UpdatePolicy = min(steps_per_trajectory * #trajectories, max_steps).
  std::size_t steps_per_trajectory = 200;
  std::size_t max_steps = 50000;
  bool warm_start = false;

  std::size_t gradient_steps(std::size_t num_trajectories) const;

  friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

/// Freshly initialized policy of the configured class.
std::unique_ptr<Policy> init_policy(const PolicyConfig& config, std::size_t state_dim, const ActionBounds& bounds, Rng& rng);

}  // namespace batchlab::policy
