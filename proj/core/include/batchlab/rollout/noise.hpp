#pragma once

#include "batchlab/common/rng.hpp"

#include <vector>

namespace batchlab::rollout {

/// Ornstein-Uhlenbeck exploration noise parameters (mean 0).
struct OuConfig {
  double theta = 5.0;
  double sigma = 0.05;
  double dt = 0.02;
  /// Fraction of collection episodes that receive noise.
  double episode_fraction = 1.0;

  friend bool operator==(const OuConfig&, const OuConfig&) = default;
};

struct OuNoiseState {
  std::vector<double> x;
  double theta = 5.0;
  double sigma = 0.05;

  static OuNoiseState zero(std::size_t dim, const OuConfig& c) { return {std::vector<double>(dim, 0.0), c.theta, c.sigma}; }
};

/// Euler-Maruyama step x <- x - theta x dt + sigma sqrt(dt) N(0,1), per dimension.
/// Returns the new noise value, which is also stored in `state`.
const std::vector<double>& ou_step(OuNoiseState& state, double dt, Rng& rng);

/// Stationary variance of the discretized process, sigma^2 dt / (1 - (1 - theta dt)^2).
double ou_stationary_variance(double theta, double sigma, double dt);

}  // namespace batchlab::rollout
