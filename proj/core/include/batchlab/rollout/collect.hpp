#pragma once

#include "batchlab/env/environment.hpp"
#include "batchlab/extraction/extraction.hpp"
#include "batchlab/policy/policy.hpp"
#include "batchlab/rollout/noise.hpp"
#include "batchlab/rollout/trajectory.hpp"
#include "batchlab/value/critic.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace batchlab::rollout {

/// Frozen actor used during collection: a policy plus optional best-of-N guidance.
struct Actor {
  const policy::Policy* policy = nullptr;
  const value::Critic* critic = nullptr;
  /// Candidates per step; 1 means plain sampling.
  std::size_t candidates = 1;

  static Actor from_spec(const policy::Policy& p, const value::Critic* critic, const extraction::ExtractionSpec& spec);
};

/// Seed of episode `index` within a collection or evaluation stream.
std::uint64_t episode_seed(std::uint64_t stream_seed, std::size_t index);

/// Rolls out one episode. Action noise, when given, is added after selection and the
/// result is clipped to the action bounds.
Trajectory run_episode(const env::Environment& env, const Actor& actor, const std::optional<OuConfig>& noise,
                       std::uint64_t seed);

/// Collects M episodes seeded by episode_seed(seed, i). Results are ordered by
/// episode index regardless of `jobs`. Environment errors are rethrown with
/// the failing episode index.
std::vector<Trajectory> collect(const env::Environment& env, const Actor& actor, std::size_t m,
                                const std::optional<OuConfig>& noise, std::uint64_t seed, int iteration = 0,
                                std::size_t jobs = 1);

struct EvalResult {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::vector<double> returns;
};

/// Mean return over n noise-free episodes. On 0/1 success tasks this is the success rate.
EvalResult evaluate(const env::Environment& env, const Actor& actor, std::size_t n_episodes, std::uint64_t seed,
                    std::size_t jobs = 1);

}  // namespace batchlab::rollout
