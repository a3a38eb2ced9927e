#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace batchlab::rollout {

struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_state;
  bool done = false;
  bool success = false;

  friend bool operator==(const Transition&, const Transition&) = default;
};

enum class Source { demo, rollout };

/// Where a trajectory came from. Demos belong to iteration 0.
struct Provenance {
  Source source = Source::demo;
  int iteration = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

std::string to_string(Source s);

struct Trajectory {
  std::vector<Transition> transitions;
  bool success = false;
  Provenance provenance;
  std::uint64_t seed = 0;

  std::size_t length() const noexcept { return transitions.size(); }
  double total_return() const noexcept;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

}  // namespace batchlab::rollout
