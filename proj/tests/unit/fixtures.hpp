#pragma once

#include "batchlab/env/environment.hpp"
#include "batchlab/policy/policy.hpp"
#include "batchlab/rollout/trajectory.hpp"

#include <algorithm>

#include <vector>

namespace batchlab::testing {

/// One-step trajectory (s, a) -> terminal with the given reward.
inline rollout::Trajectory single_step(std::vector<double> s, std::vector<double> a, double reward = 0.0,
                                       bool success = false, std::vector<double> next = {}) {
  rollout::Trajectory t;
  if (next.empty()) next = s;
  t.transitions.push_back({std::move(s), std::move(a), reward, std::move(next), true, success});
  t.success = success;
  return t;
}

/// Policy that replays the environment's scripted controller from the observation.
class ScriptedPolicy final : public policy::Policy {
 public:
  ScriptedPolicy(const env::Environment& env, int mode = 0)
      : env_(env), bounds_{env.spec().action_low, env.spec().action_high}, mode_(mode) {}
  std::size_t state_dim() const override { return env_.spec().state_dim; }
  const policy::ActionBounds& bounds() const override { return bounds_; }
  nn::Tensor sample(std::span<const double> state, std::size_t n, std::uint64_t) const override {
    env::EnvState s;
    s.observation = nn::Tensor::row(state);
    const auto p = env_.project(state);
    s.position = {p[0], p[1]};
    const auto a = env_.scripted_action(s, mode_);
    nn::Tensor out = nn::Tensor::matrix(n, a.size());
    for (std::size_t i = 0; i < n; ++i) std::copy(a.begin(), a.end(), out.row_span(i).begin());
    return out;
  }

 private:
  const env::Environment& env_;
  policy::ActionBounds bounds_;
  int mode_;
};

}  // namespace batchlab::testing
