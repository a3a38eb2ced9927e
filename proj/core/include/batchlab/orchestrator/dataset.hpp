#pragma once

#include "batchlab/rollout/trajectory.hpp"

#include <span>
#include <vector>

namespace batchlab::orchestrator {

/// Append-only cumulative dataset D_0 u D_1 u ... u D_i. Trajectories keep
/// their provenance; nothing is ever removed.
class DatasetStore {
 public:
  /// Appends a batch as D_iteration. Iterations must arrive in order 0, 1, 2, ...
  void add(int iteration, std::vector<rollout::Trajectory> batch);

  std::span<const rollout::Trajectory> all() const { return trajectories_; }
  /// Trajectories collected at `iteration` (demos are iteration 0).
  std::span<const rollout::Trajectory> iteration(int i) const;
  int last_iteration() const { return static_cast<int>(offsets_.size()) - 1; }

  std::size_t size() const { return trajectories_.size(); }
  std::size_t transitions() const { return transitions_; }
  std::size_t successes() const { return successes_; }
  std::size_t failures() const { return trajectories_.size() - successes_; }

 private:
  std::vector<rollout::Trajectory> trajectories_;
  std::vector<std::size_t> offsets_;  // start index of each iteration
  std::size_t transitions_ = 0;
  std::size_t successes_ = 0;
};

}  // namespace batchlab::orchestrator
