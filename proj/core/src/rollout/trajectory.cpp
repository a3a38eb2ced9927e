#include "batchlab/rollout/trajectory.hpp"

namespace batchlab::rollout {

std::string to_string(Source s) { return s == Source::demo ? "demo" : "rollout"; }

double Trajectory::total_return() const noexcept {
  double r = 0.0;
  for (const auto& t : transitions) r += t.reward;
  return r;
}

}  // namespace batchlab::rollout
