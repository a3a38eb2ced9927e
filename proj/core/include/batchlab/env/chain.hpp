#pragma once

#include "batchlab/env/environment.hpp"

#include <vector>

namespace batchlab::env {

struct Outcome {
  double probability = 1.0;
  std::size_t next_state = 0;
  double reward = 0.0;
  bool terminal = false;
};

/// Finite MDP: outcomes[s][a] lists the successor distribution of (s, a).
struct TabularMdp {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<std::vector<std::vector<Outcome>>> outcomes;
  double gamma = 0.9;
};

/// Q table indexed [state][action].
using QTable = std::vector<std::vector<double>>;

struct ValueIterationResult {
  QTable q;
  int sweeps = 0;
  double final_delta = 0.0;
};

/// Bellman optimality iteration until the sup-norm change drops below `tolerance`.
ValueIterationResult value_iteration(const TabularMdp& mdp, double tolerance = 1e-10, int max_sweeps = 100000);

/// Five-state chain with two actions exposed through the continuous interface.
///
/// States 0..4, observation is the one-hot state. The 1-D action is read as
/// "right" when a >= 0 and "left" otherwise. Right moves s -> s+1; left moves
/// s -> max(s-1, 0). Taking right in state 4 pays reward 1 and ends the
/// episode with success; every other transition pays 0. Start states are
/// uniform over {0, 1, 2, 3}.
class Chain5 final : public Environment {
 public:
  static constexpr std::size_t kStates = 5;
  static constexpr double kLeft = -1.0;
  static constexpr double kRight = 1.0;

  explicit Chain5(double gamma = 0.9, int horizon = 20);

  const MdpSpec& spec() const override { return spec_; }
  EnvState reset(std::uint64_t seed) const override;
  StepResult step(const EnvState& state, std::span<const double> action) const override;
  std::array<double, 2> project(std::span<const double> observation) const override;
  Workspace workspace() const override { return {0.0, static_cast<double>(kStates), 0.0, 1.0}; }
  std::vector<double> scripted_action(const EnvState& state, int mode) const override;

  TabularMdp tabular() const;
  EnvState state_at(std::size_t index, int t = 0) const;
  static std::size_t index_of(std::span<const double> observation);
  static std::size_t action_index(double action) { return action >= 0.0 ? 1 : 0; }

 private:
  MdpSpec spec_;
};

}  // namespace batchlab::env
