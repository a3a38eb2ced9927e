#pragma once

#include "batchlab/nn/tensor.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace batchlab::env {

struct MdpSpec {
  std::string name;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::vector<double> action_low;
  std::vector<double> action_high;
  int horizon = 1;
  double gamma = 0.99;
};

struct EnvState {
  nn::Tensor observation;
  /// Underlying physical state (2-D position for point-mass tasks, chain index for Chain5).
  std::vector<double> position;
  int t = 0;
  bool done = false;
  bool success = false;

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

struct StepResult {
  EnvState state;
  double reward = 0.0;
};

/// Axis-aligned 2-D region used for visitation histograms.
struct Workspace {
  double x_lo = 0.0;
  double x_hi = 1.0;
  double y_lo = 0.0;
  double y_hi = 1.0;
};

/// Deterministic episodic MDP with sparse 0/1 success reward. Implementations
/// are immutable value objects; all randomness enters through reset seeds.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const MdpSpec& spec() const = 0;
  /// Samples the initial state from the start distribution; deterministic in `seed`.
  virtual EnvState reset(std::uint64_t seed) const = 0;
  /// Clips `action` to the bounds and advances one control step. Throws EnvError once done.
  virtual StepResult step(const EnvState& state, std::span<const double> action) const = 0;

  /// 2-D projection of an observation onto the workspace plane.
  virtual std::array<double, 2> project(std::span<const double> observation) const = 0;
  virtual Workspace workspace() const = 0;

  /// Closed-loop scripted expert. Multimodal tasks expose several behaviours via `mode`.
  virtual std::vector<double> scripted_action(const EnvState& state, int mode) const = 0;
  virtual int scripted_modes() const { return 1; }

  std::vector<double> clip_action(std::span<const double> action) const;
};

}  // namespace batchlab::env
