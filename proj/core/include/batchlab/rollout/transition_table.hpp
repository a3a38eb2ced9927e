#pragma once

#include "batchlab/nn/tensor.hpp"
#include "batchlab/rollout/trajectory.hpp"

#include <span>
#include <vector>

namespace batchlab::rollout {

/// Minibatch of transitions, one per row.
struct TransitionBatch {
  nn::Tensor states;       // B×S
  nn::Tensor actions;      // B×A
  nn::Tensor rewards;      // B×1
  nn::Tensor next_states;  // B×S
  nn::Tensor dones;        // B×1, 1.0 for terminal transitions
};

/// Flattened, column-oriented view of a trajectory set for training.
class TransitionTable {
 public:
  TransitionTable() = default;
  explicit TransitionTable(std::span<const Trajectory> trajectories);

  std::size_t size() const noexcept { return rewards_.size(); }
  bool empty() const noexcept { return rewards_.empty(); }
  std::size_t num_trajectories() const noexcept { return num_trajectories_; }
  std::size_t state_dim() const noexcept { return state_dim_; }
  std::size_t action_dim() const noexcept { return action_dim_; }

  /// Row indices of transitions belonging to successful trajectories.
  std::vector<std::size_t> success_indices() const;
  std::vector<std::size_t> all_indices() const;
  bool from_success(std::size_t i) const { return traj_success_[i]; }
  std::size_t trajectory_of(std::size_t i) const { return traj_index_[i]; }

  TransitionBatch gather(std::span<const std::size_t> rows) const;

  std::span<const double> state(std::size_t i) const { return {states_.data() + i * state_dim_, state_dim_}; }
  std::span<const double> action(std::size_t i) const { return {actions_.data() + i * action_dim_, action_dim_}; }

 private:
  std::size_t state_dim_ = 0;
  std::size_t action_dim_ = 0;
  std::size_t num_trajectories_ = 0;
  std::vector<double> states_;
  std::vector<double> actions_;
  std::vector<double> rewards_;
  std::vector<double> next_states_;
  std::vector<double> dones_;
  std::vector<bool> traj_success_;
  std::vector<std::size_t> traj_index_;
};

}  // namespace batchlab::rollout
