#pragma once

#include "batchlab/env/environment.hpp"
#include "batchlab/rollout/trajectory.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <string>
#include <vector>

namespace batchlab::env {

std::vector<std::string> environment_names();

/// Builds an environment by name. `params` overrides geometry keys of the
/// defaults (unknown keys raise ConfigError naming "env_params.<key>").
std::unique_ptr<Environment> make_environment(const std::string& name, const nlohmann::json& params, double gamma);

/// Default geometry of `name` as a json object, i.e. every overridable key.
nlohmann::json default_env_params(const std::string& name);

/// Scripted expert demonstrations. Behaviour modes are assigned round-robin by
/// demo index; `noise_scale` is the std of Gaussian noise added to every
/// scripted action. Throws EnvError if a demo fails to reach the goal.
std::vector<rollout::Trajectory> scripted_demos(const Environment& env, int n, double noise_scale, std::uint64_t seed);

}  // namespace batchlab::env
