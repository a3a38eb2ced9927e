#pragma once

#include "batchlab/env/environment.hpp"
#include "batchlab/rollout/trajectory.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace batchlab::orchestrator {

/// bins x bins visitation counts over the environment workspace; cell (ix, iy)
/// covers the ix-th x interval and iy-th y interval.
struct Histogram {
  std::size_t bins = 0;
  std::vector<std::uint64_t> counts;  // row-major, index iy * bins + ix

  std::uint64_t at(std::size_t ix, std::size_t iy) const { return counts[iy * bins + ix]; }
  std::uint64_t total() const;
  std::size_t nonzero_cells() const;

  friend bool operator==(const Histogram&, const Histogram&) = default;
};

/// Counts the projected position of every transition's state. Positions on or
/// beyond the workspace edge fall into the boundary cells.
Histogram visitation_histogram(const env::Environment& env, std::span<const rollout::Trajectory> trajectories,
                               std::size_t bins, bool success_only);

}  // namespace batchlab::orchestrator
