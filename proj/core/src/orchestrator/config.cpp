#include "batchlab/orchestrator/config.hpp"

#include "batchlab/common/error.hpp"
#include "batchlab/env/registry.hpp"

#include <algorithm>
#include <cmath>

namespace batchlab::orchestrator {

std::string to_string(AlgorithmClass a) {
  switch (a) {
    case AlgorithmClass::il: return "il";
    case AlgorithmClass::filtered_il: return "filtered_il";
    case AlgorithmClass::value_rl: return "value_rl";
  }
  return "?";
}

AlgorithmClass algorithm_class_from_string(const std::string& name) {
  for (auto a : {AlgorithmClass::il, AlgorithmClass::filtered_il, AlgorithmClass::value_rl})
    if (to_string(a) == name) return a;
  throw ConfigError("algorithm", "unknown algorithm class '" + name + "' (expected il, filtered_il or value_rl)");
}

namespace {

void require(bool ok, const char* field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

}  // namespace

void ExperimentConfig::validate() const {
  require(!env.empty(), "env", "environment name is required");
  const auto names = env::environment_names();
  require(std::find(names.begin(), names.end(), env) != names.end(), "env", "unknown environment '" + env + "'");
  require(env_params.is_object(), "env_params", "must be an object");

  using extraction::ExtractionKind;
  const auto kind = extraction.kind;
  switch (algorithm) {
    case AlgorithmClass::il:
      require(kind == ExtractionKind::none_il, "extraction.kind", "algorithm il requires extraction none_il");
      break;
    case AlgorithmClass::filtered_il:
      require(kind == ExtractionKind::filtered_il, "extraction.kind", "algorithm filtered_il requires extraction filtered_il");
      break;
    case AlgorithmClass::value_rl:
      require(kind == ExtractionKind::awr_explicit || kind == ExtractionKind::best_of_n_implicit, "extraction.kind",
              "algorithm value_rl requires awr_explicit or best_of_n_implicit");
      break;
  }
  require(extraction.beta > 0.0, "extraction.beta", "must be > 0");
  require(extraction.n_samples >= 1, "extraction.n_samples", "must be >= 1");
  require(extraction.weight_clip > 0.0, "extraction.weight_clip", "must be > 0");

  require(!policy.hidden.empty(), "policy.hidden", "needs at least one hidden layer");
  require(std::all_of(policy.hidden.begin(), policy.hidden.end(), [](auto h) { return h > 0; }), "policy.hidden",
          "layer widths must be >= 1");
  require(policy.diffusion_steps >= 1, "policy.diffusion_steps", "must be >= 1");
  require(policy.beta_start > 0.0 && policy.beta_start < policy.beta_end && policy.beta_end < 1.0, "policy.beta_start",
          "requires 0 < beta_start < beta_end < 1");
  require(policy.lr > 0.0 && std::isfinite(policy.lr), "policy.lr", "must be finite and > 0");
  require(policy.batch_size >= 1, "policy.batch_size", "must be >= 1");
  require(policy.max_steps >= 1, "policy.max_steps", "must be >= 1");

  require(value.tau > 0.0 && value.tau < 1.0, "value.tau", "must lie in (0,1)");
  require(value.gamma > 0.0 && value.gamma < 1.0, "value.gamma", "must lie in (0,1)");
  require(value.lr > 0.0 && std::isfinite(value.lr), "value.lr", "must be finite and > 0");
  require(value.batch_size >= 1, "value.batch_size", "must be >= 1");
  require(value.polyak >= 0.0 && value.polyak <= 1.0, "value.polyak", "must lie in [0,1]");
  require(!value.hidden.empty(), "value.hidden", "needs at least one hidden layer");
  require(value.max_steps >= 1, "value.max_steps", "must be >= 1");

  require(iterations >= 1, "iterations", "N must be >= 1");
  require(rollouts_per_iteration >= 1, "rollouts_per_iteration", "M must be >= 1");
  require(demos >= 1, "demos", "must be >= 1");
  require(demo_noise >= 0.0, "demo_noise", "must be >= 0");
  require(eval_episodes >= 1, "eval_episodes", "must be >= 1");
  require(!seeds.empty(), "seeds", "at least one seed is required");
  require(jobs >= 1, "jobs", "must be >= 1");
  if (noise) {
    require(noise->theta >= 0.0, "noise.theta", "must be >= 0");
    require(noise->sigma >= 0.0, "noise.sigma", "must be >= 0");
    require(noise->dt > 0.0, "noise.dt", "must be > 0");
    require(noise->episode_fraction >= 0.0 && noise->episode_fraction <= 1.0, "noise.episode_fraction",
            "must lie in [0,1]");
  }
}

}  // namespace batchlab::orchestrator
