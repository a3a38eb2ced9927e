#include "batchlab/policy/config.hpp"

#include "batchlab/common/error.hpp"
#include "batchlab/policy/diffusion.hpp"

#include <algorithm>

namespace batchlab::policy {

std::size_t PolicyConfig::gradient_steps(std::size_t num_trajectories) const {
  return std::min(steps_per_trajectory * num_trajectories, max_steps);
}

std::unique_ptr<Policy> init_policy(const PolicyConfig& config, std::size_t state_dim, const ActionBounds& bounds,
                                    Rng& rng) {
  const std::size_t adim = bounds.dim();
  if (config.policy_class == PolicyClass::gaussian) {
    std::vector<std::size_t> sizes{state_dim};
    sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
    sizes.push_back(adim);
    GaussianPolicyParams p{nn::MlpParams::init(sizes, config.activation, rng), nn::Tensor::matrix(1, adim, config.init_log_std)};
    return std::make_unique<GaussianPolicy>(std::move(p), bounds, config.gaussian_mode);
  }
  std::vector<std::size_t> sizes{state_dim + adim + kTimeEmbeddingDim};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(adim);
  DiffusionPolicyParams p{nn::MlpParams::init(sizes, config.activation, rng),
                          DiffusionSchedule::linear(config.diffusion_steps, config.beta_start, config.beta_end)};
  return std::make_unique<DiffusionPolicy>(std::move(p), bounds, config.clip_x0);
}

}  // namespace batchlab::policy
