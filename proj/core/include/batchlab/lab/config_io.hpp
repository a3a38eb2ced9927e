#pragma once

#include "batchlab/orchestrator/config.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace batchlab::lab {

/// Built-in default blocks: a "global" block shared by every environment
/// (batch_size, lr, expectile, discount, n_samples, diffusion_steps) and one
/// block per environment (demos, demo_noise, ou_theta, ou_sigma).
const nlohmann::json& default_blocks();

/// Complete document for `env` with every key at its default.
nlohmann::json default_document(const std::string& env);

/// Parses a config document. Missing keys take the defaults for the named
/// environment; unknown keys and type mismatches raise ConfigError naming the
/// key path (e.g. "policy.lr"). The result is validated.
orchestrator::ExperimentConfig config_from_json(const nlohmann::json& doc);

/// Full document (every key) for `config`; config_from_json inverts it exactly.
nlohmann::json config_to_json(const orchestrator::ExperimentConfig& config);

/// Reads and parses a JSON config file. Unreadable or malformed files raise ConfigError.
orchestrator::ExperimentConfig load_config(const std::filesystem::path& path);

/// Reduced-cost profile used by `accept --fast`: 25 diffusion steps, at most
/// 8000 gradient steps per retraining, and at most 50 evaluation episodes.
/// Per-trajectory step counts are untouched, so small datasets (and so pi_0)
/// train exactly as in the full profile.
void apply_fast_profile(orchestrator::ExperimentConfig& config);

}  // namespace batchlab::lab
