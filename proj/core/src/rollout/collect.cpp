#include "batchlab/rollout/collect.hpp"

#include "batchlab/common/error.hpp"
#include "batchlab/common/parallel.hpp"
#include "batchlab/common/rng.hpp"

#include <cmath>

namespace batchlab::rollout {

namespace {

// Sub-stream tags within one episode seed.
constexpr std::uint64_t kResetStream = 0;
constexpr std::uint64_t kActionStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kNoiseGateStream = 3;

}  // namespace

Actor Actor::from_spec(const policy::Policy& p, const value::Critic* critic, const extraction::ExtractionSpec& spec) {
  const std::size_t n = spec.rollout_candidates();
  return Actor{&p, n > 1 ? critic : nullptr, n > 1 && critic ? n : 1};
}

std::uint64_t episode_seed(std::uint64_t stream_seed, std::size_t index) { return derive_seed({stream_seed, index}); }

Trajectory run_episode(const env::Environment& env, const Actor& actor, const std::optional<OuConfig>& noise,
                       std::uint64_t seed) {
  const auto& spec = env.spec();
  std::optional<OuNoiseState> ou;
  Rng noise_rng(derive_seed({seed, kNoiseStream}));
  if (noise) {
    Rng gate(derive_seed({seed, kNoiseGateStream}));
    if (gate.uniform(0.0, 1.0) < noise->episode_fraction) ou = OuNoiseState::zero(spec.action_dim, *noise);
  }

  Trajectory traj;
  traj.seed = seed;
  env::EnvState state = env.reset(derive_seed({seed, kResetStream}));
  for (int t = 0; !state.done; ++t) {
    const auto obs = state.observation.to_vector();
    std::vector<double> action = extraction::select_action(
        *actor.policy, actor.critic, obs, actor.candidates, derive_seed({seed, kActionStream, static_cast<std::uint64_t>(t)}));
    if (ou) {
      const auto& eps = ou_step(*ou, noise->dt, noise_rng);
      for (std::size_t d = 0; d < action.size(); ++d) action[d] += eps[d];
    }
    action = env.clip_action(action);
    auto step = env.step(state, action);
    traj.transitions.push_back(
        {obs, action, step.reward, step.state.observation.to_vector(), step.state.done, step.state.success});
    state = std::move(step.state);
  }
  traj.success = state.success;
  return traj;
}

std::vector<Trajectory> collect(const env::Environment& env, const Actor& actor, std::size_t m,
                                const std::optional<OuConfig>& noise, std::uint64_t seed, int iteration,
                                std::size_t jobs) {
  if (m == 0) throw Error("collect: M must be >= 1");
  std::vector<Trajectory> out(m);
  parallel_for(m, jobs, [&](std::size_t i) {
    try {
      out[i] = run_episode(env, actor, noise, episode_seed(seed, i));
    } catch (const EnvError& e) {
      throw EnvError("episode " + std::to_string(i) + ": " + e.what());
    }
    out[i].provenance = {Source::rollout, iteration};
  });
  return out;
}

EvalResult evaluate(const env::Environment& env, const Actor& actor, std::size_t n_episodes, std::uint64_t seed,
                    std::size_t jobs) {
  if (n_episodes == 0) throw Error("evaluate: need at least one episode");
  EvalResult r;
  r.returns.resize(n_episodes);
  parallel_for(n_episodes, jobs, [&](std::size_t i) {
    r.returns[i] = run_episode(env, actor, std::nullopt, episode_seed(seed, i)).total_return();
  });
  double sum = 0.0;
  for (double v : r.returns) sum += v;
  r.mean = sum / static_cast<double>(n_episodes);
  if (n_episodes > 1) {
    double ss = 0.0;
    for (double v : r.returns) ss += (v - r.mean) * (v - r.mean);
    r.stderr_ = std::sqrt(ss / static_cast<double>(n_episodes - 1) / static_cast<double>(n_episodes));
  }
  return r;
}

}  // namespace batchlab::rollout
