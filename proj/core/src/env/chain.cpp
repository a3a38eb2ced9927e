#include "batchlab/env/chain.hpp"

#include "batchlab/common/error.hpp"
#include "batchlab/common/rng.hpp"

#include <algorithm>
#include <cmath>

namespace batchlab::env {

ValueIterationResult value_iteration(const TabularMdp& mdp, double tolerance, int max_sweeps) {
  ValueIterationResult result;
  result.q.assign(mdp.num_states, std::vector<double>(mdp.num_actions, 0.0));
  std::vector<double> v(mdp.num_states, 0.0);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double delta = 0.0;
    QTable next = result.q;
    for (std::size_t s = 0; s < mdp.num_states; ++s) {
      for (std::size_t a = 0; a < mdp.num_actions; ++a) {
        double q = 0.0;
        for (const auto& o : mdp.outcomes[s][a]) q += o.probability * (o.reward + (o.terminal ? 0.0 : mdp.gamma * v[o.next_state]));
        delta = std::max(delta, std::abs(q - result.q[s][a]));
        next[s][a] = q;
      }
    }
    result.q = std::move(next);
    for (std::size_t s = 0; s < mdp.num_states; ++s) v[s] = *std::max_element(result.q[s].begin(), result.q[s].end());
    result.sweeps = sweep;
    result.final_delta = delta;
    if (delta < tolerance) break;
  }
  return result;
}

Chain5::Chain5(double gamma, int horizon) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw EnvError("Chain5: gamma must lie in (0,1)");
  if (horizon < 1) throw EnvError("Chain5: horizon must be >= 1");
  spec_ = MdpSpec{"Chain5", kStates, 1, {-1.0}, {1.0}, horizon, gamma};
}

EnvState Chain5::state_at(std::size_t index, int t) const {
  EnvState s;
  s.observation = nn::Tensor::matrix(1, kStates);
  s.observation[index] = 1.0;
  s.position = {static_cast<double>(index)};
  s.t = t;
  return s;
}

std::size_t Chain5::index_of(std::span<const double> observation) {
  return static_cast<std::size_t>(std::max_element(observation.begin(), observation.end()) - observation.begin());
}

EnvState Chain5::reset(std::uint64_t seed) const {
  Rng rng(seed);
  return state_at(rng.index(kStates - 1));
}

StepResult Chain5::step(const EnvState& state, std::span<const double> action) const {
  if (state.done) throw EnvError("Chain5: step called after episode end");
  const auto a = clip_action(action);
  const auto s = static_cast<std::size_t>(state.position[0]);
  const bool right = action_index(a[0]) == 1;
  StepResult r;
  if (right && s == kStates - 1) {
    r.state = state_at(s, state.t + 1);
    r.state.success = true;
    r.reward = 1.0;
  } else {
    const std::size_t next = right ? s + 1 : (s == 0 ? 0 : s - 1);
    r.state = state_at(next, state.t + 1);
  }
  r.state.done = r.state.success || r.state.t >= spec_.horizon;
  return r;
}

std::array<double, 2> Chain5::project(std::span<const double> observation) const {
  return {static_cast<double>(index_of(observation)) + 0.5, 0.5};
}

std::vector<double> Chain5::scripted_action(const EnvState&, int) const { return {kRight}; }

TabularMdp Chain5::tabular() const {
  TabularMdp m;
  m.num_states = kStates;
  m.num_actions = 2;
  m.gamma = spec_.gamma;
  m.outcomes.assign(kStates, std::vector<std::vector<Outcome>>(2));
  for (std::size_t s = 0; s < kStates; ++s) {
    m.outcomes[s][0] = {Outcome{1.0, s == 0 ? 0 : s - 1, 0.0, false}};
    if (s == kStates - 1)
      m.outcomes[s][1] = {Outcome{1.0, s, 1.0, true}};
    else
      m.outcomes[s][1] = {Outcome{1.0, s + 1, 0.0, false}};
  }
  return m;
}

}  // namespace batchlab::env
