#pragma once

#include "batchlab/common/rng.hpp"
#include "batchlab/nn/graph.hpp"
#include "batchlab/nn/mlp.hpp"
#include "batchlab/rollout/transition_table.hpp"
#include "batchlab/value/critic.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace batchlab::value {

struct IqlConfig {
  double tau = 0.8;
  double gamma = 0.99;
  double lr = 3e-4;
  std::size_t batch_size = 256;
  /// Target update rate per gradient step. 0.05 rather than the usual 0.005:
  /// retraining runs only a few thousand steps, too few for a slower target.
  double polyak = 0.05;
  /// Gradient steps per UpdateValue = min(steps_per_trajectory * #trajectories, max_steps).
  std::size_t steps_per_trajectory = 200;
  std::size_t max_steps = 50000;
  std::vector<std::size_t> hidden{128, 128};
  nn::Activation activation = nn::Activation::relu;
  /// Second Q head; targets and best-of-N selection use min(Q1, Q2).
  bool twin_q = true;
  bool warm_start = false;

  std::size_t gradient_steps(std::size_t num_trajectories) const;

  friend bool operator==(const IqlConfig&, const IqlConfig&) = default;
};

/// Q, target Q and V networks of implicit Q-learning. Q takes [state, action].
/// With twin_q the critic reports min(Q1, Q2).
struct ValueHeads final : Critic {
  nn::MlpParams q_net;
  nn::MlpParams q_target_net;
  nn::MlpParams v_net;
  std::optional<nn::MlpParams> q2_net;
  std::optional<nn::MlpParams> q2_target_net;
  double tau = 0.8;
  double gamma = 0.99;

  static ValueHeads init(std::size_t state_dim, std::size_t action_dim, const IqlConfig& config, Rng& rng);

  nn::Tensor q(const nn::Tensor& states, const nn::Tensor& actions) const override;
  nn::Tensor v(const nn::Tensor& states) const override;
  /// Target-network estimate (min over twins) used as the V regression target.
  nn::Tensor q_target_values(const nn::Tensor& states, const nn::Tensor& actions) const;

  bool operator==(const ValueHeads& other) const;
};

/// |tau - 1(x<0)| * x^2.
double expectile_loss(double tau, double x);

/// Mean squared Bellman error against r + gamma * (1 - done) * V(s'), V held fixed.
double q_loss(const ValueHeads& heads, const rollout::TransitionBatch& batch);
/// Mean expectile loss of Q_target(s,a) - V(s), Q_target held fixed.
double v_loss(const ValueHeads& heads, const rollout::TransitionBatch& batch);

/// Graph forms of the two losses; differentiable in the bound network only.
nn::Var q_loss_graph(nn::Graph& g, const nn::MlpBinding& q, const nn::Tensor& targets, const rollout::TransitionBatch& batch);
nn::Var v_loss_graph(nn::Graph& g, const nn::MlpBinding& v, const nn::Tensor& q_targets,
                     const rollout::TransitionBatch& batch, double tau);
/// r + gamma * (1 - done) * V(s').
nn::Tensor bellman_targets(const ValueHeads& heads, const rollout::TransitionBatch& batch);

nn::Tensor concat_state_action(const nn::Tensor& states, const nn::Tensor& actions);

struct ValueTrainingStats {
  std::size_t steps = 0;
  double final_q_loss = 0.0;
  double final_v_loss = 0.0;
};

/// UpdateValue: trains Q/V from fresh initialization (or `warm_start`) on the
/// table for config.gradient_steps(#trajectories) steps. Throws NumericError
/// with step diagnostics if a loss turns non-finite.
ValueHeads update_value(const rollout::TransitionTable& table, const IqlConfig& config, std::uint64_t seed,
                        const ValueHeads* warm_start = nullptr, ValueTrainingStats* stats = nullptr);

/// Full-batch expectile regression of `v` onto fixed per-row targets, the V
/// half of IQL in isolation. Rows of `states` pair with rows of `q_targets` (N×1).
void fit_expectile_value(nn::MlpParams& v, const nn::Tensor& states, const nn::Tensor& q_targets, double tau,
                         std::size_t steps, double lr);

}  // namespace batchlab::value
