#pragma once

#include "batchlab/common/rng.hpp"
#include "batchlab/nn/graph.hpp"
#include "batchlab/nn/mlp.hpp"
#include "batchlab/policy/policy.hpp"

#include <vector>

namespace batchlab::policy {

inline constexpr std::size_t kTimeEmbeddingDim = 16;

/// DDPM noise schedule. Vectors are indexed by diffusion step t = 0..T with
/// beta[0] unused and alpha_bar[0] = 1.
struct DiffusionSchedule {
  int steps = 0;
  double beta_start = 1e-4;
  double beta_end = 2e-2;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;

  /// Linearly spaced betas from beta_start (t=1) to beta_end (t=T). T=1 uses beta_start.
  static DiffusionSchedule linear(int steps, double beta_start = 1e-4, double beta_end = 2e-2);

  friend bool operator==(const DiffusionSchedule&, const DiffusionSchedule&) = default;
};

/// 16-dim sinusoidal embedding of the diffusion step.
std::vector<double> timestep_embedding(int t);

/// eps_net maps [state, noisy action, embedding(t)] to predicted noise.
struct DiffusionPolicyParams {
  nn::MlpParams eps_net;
  DiffusionSchedule schedule;

  friend bool operator==(const DiffusionPolicyParams&, const DiffusionPolicyParams&) = default;
};

/// One noised training minibatch. Actions are in normalized [-1,1] units.
struct DiffusionBatch {
  std::vector<int> t;
  nn::Tensor eps;    // B×A
  nn::Tensor noisy;  // B×A, sqrt(abar_t) a + sqrt(1 - abar_t) eps
  nn::Tensor input;  // B×(S+A+16), eps_net input
};

/// Draws t ~ U{1..T} and eps ~ N(0, I) per row.
DiffusionBatch make_diffusion_batch(const DiffusionSchedule& schedule, const nn::Tensor& states,
                                    const nn::Tensor& normalized_actions, Rng& rng);

/// Mean over rows of ||eps - predicted||^2.
double diffusion_loss_value(const DiffusionBatch& batch, const nn::Tensor& predicted);

/// Per-sample epsilon-prediction loss on the graph, B×1.
nn::Var diffusion_per_sample_loss(nn::Graph& g, const nn::MlpBinding& eps_net, const DiffusionBatch& batch);

/// Noise-prediction loss for a batch of (state, normalized action) rows; deterministic in `seed`.
double diffusion_train_loss(const DiffusionPolicyParams& p, const nn::Tensor& states,
                            const nn::Tensor& normalized_actions, std::uint64_t seed);

class DiffusionPolicy final : public Policy {
 public:
  DiffusionPolicy(DiffusionPolicyParams params, ActionBounds bounds, bool clip_x0 = true);

  std::size_t state_dim() const override {
    return params_.eps_net.input_dim() - bounds_.dim() - kTimeEmbeddingDim;
  }
  const ActionBounds& bounds() const override { return bounds_; }

  /// Ancestral DDPM sampling from x_T ~ N(0, I) down to x_0, then denormalized and clipped.
  nn::Tensor sample(std::span<const double> state, std::size_t n, std::uint64_t seed) const override;

  bool clip_x0() const { return clip_x0_; }
  DiffusionPolicyParams& params() { return params_; }
  const DiffusionPolicyParams& params() const { return params_; }

 private:
  DiffusionPolicyParams params_;
  ActionBounds bounds_;
  bool clip_x0_;
};

}  // namespace batchlab::policy
