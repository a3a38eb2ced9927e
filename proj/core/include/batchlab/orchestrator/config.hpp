#pragma once

#include "batchlab/extraction/extraction.hpp"
#include "batchlab/policy/config.hpp"
#include "batchlab/rollout/noise.hpp"
#include "batchlab/value/iql.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace batchlab::orchestrator {

enum class AlgorithmClass { il, filtered_il, value_rl };
std::string to_string(AlgorithmClass a);
AlgorithmClass algorithm_class_from_string(const std::string& name);

/// Everything that determines one batch online RL run except the seed.
struct ExperimentConfig {
  std::string env;
  nlohmann::json env_params = nlohmann::json::object();

  AlgorithmClass algorithm = AlgorithmClass::value_rl;
  extraction::ExtractionSpec extraction;
  policy::PolicyConfig policy;
  value::IqlConfig value;

  int iterations = 10;
  std::size_t rollouts_per_iteration = 200;
  std::size_t demos = 20;
  /// Std of Gaussian noise on scripted demo actions.
  double demo_noise = 0.0;
  std::optional<rollout::OuConfig> noise = rollout::OuConfig{};
  std::size_t eval_episodes = 100;

  std::vector<std::uint64_t> seeds{0, 1, 2};
  /// Worker threads for collection and evaluation (and runs, in sweeps).
  std::size_t jobs = 1;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

}  // namespace batchlab::orchestrator
