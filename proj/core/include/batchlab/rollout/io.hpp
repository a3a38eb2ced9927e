#pragma once

#include "batchlab/rollout/trajectory.hpp"

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace batchlab::rollout {

// Trajectory JSONL: one JSON object per line with metadata and flat
// row-major transition arrays. Doubles are written in shortest round-trip
// form, so write followed by read reproduces every bit.

void write_trajectory(std::ostream& out, const Trajectory& t);
void write_trajectories(std::ostream& out, std::span<const Trajectory> ts);
/// Throws FormatError naming the offending line.
std::vector<Trajectory> read_trajectories(std::istream& in);

/// JSON Schema describing one line of the trajectory JSONL format.
std::string_view trajectory_schema();

}  // namespace batchlab::rollout
