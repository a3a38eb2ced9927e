#include "batchlab/rollout/transition_table.hpp"

#include "batchlab/common/error.hpp"

namespace batchlab::rollout {

TransitionTable::TransitionTable(std::span<const Trajectory> trajectories) : num_trajectories_(trajectories.size()) {
  bool first = true;
  for (std::size_t k = 0; k < trajectories.size(); ++k) {
    for (const auto& t : trajectories[k].transitions) {
      if (first) {
        state_dim_ = t.state.size();
        action_dim_ = t.action.size();
        first = false;
      }
      if (t.state.size() != state_dim_ || t.next_state.size() != state_dim_ || t.action.size() != action_dim_)
        throw ShapeError("TransitionTable: inconsistent transition dimensions");
      states_.insert(states_.end(), t.state.begin(), t.state.end());
      actions_.insert(actions_.end(), t.action.begin(), t.action.end());
      next_states_.insert(next_states_.end(), t.next_state.begin(), t.next_state.end());
      rewards_.push_back(t.reward);
      dones_.push_back(t.done ? 1.0 : 0.0);
      traj_success_.push_back(trajectories[k].success);
      traj_index_.push_back(k);
    }
  }
}

std::vector<std::size_t> TransitionTable::success_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i)
    if (traj_success_[i]) out.push_back(i);
  return out;
}

std::vector<std::size_t> TransitionTable::all_indices() const {
  std::vector<std::size_t> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

TransitionBatch TransitionTable::gather(std::span<const std::size_t> rows) const {
  const std::size_t n = rows.size();
  TransitionBatch b{nn::Tensor::matrix(n, state_dim_), nn::Tensor::matrix(n, action_dim_), nn::Tensor::matrix(n, 1),
                    nn::Tensor::matrix(n, state_dim_), nn::Tensor::matrix(n, 1)};
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t i = rows[j];
    if (i >= size()) throw ShapeError("TransitionTable::gather: row out of range");
    std::copy_n(states_.begin() + static_cast<std::ptrdiff_t>(i * state_dim_), state_dim_, b.states.row_span(j).begin());
    std::copy_n(actions_.begin() + static_cast<std::ptrdiff_t>(i * action_dim_), action_dim_, b.actions.row_span(j).begin());
    std::copy_n(next_states_.begin() + static_cast<std::ptrdiff_t>(i * state_dim_), state_dim_,
                b.next_states.row_span(j).begin());
    b.rewards[j] = rewards_[i];
    b.dones[j] = dones_[i];
  }
  return b;
}

}  // namespace batchlab::rollout
