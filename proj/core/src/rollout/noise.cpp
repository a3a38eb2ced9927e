#include "batchlab/rollout/noise.hpp"

#include "batchlab/common/error.hpp"

#include <cmath>

namespace batchlab::rollout {

const std::vector<double>& ou_step(OuNoiseState& state, double dt, Rng& rng) {
  if (!(dt > 0.0)) throw Error("ou_step: dt must be positive");
  const double sd = state.sigma * std::sqrt(dt);
  for (double& x : state.x) x += -state.theta * x * dt + sd * rng.normal();
  return state.x;
}

double ou_stationary_variance(double theta, double sigma, double dt) {
  const double a = 1.0 - theta * dt;
  return sigma * sigma * dt / (1.0 - a * a);
}

}  // namespace batchlab::rollout
