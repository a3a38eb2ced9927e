#pragma once

#include "batchlab/common/error.hpp"
#include "batchlab/orchestrator/config.hpp"
#include "batchlab/orchestrator/dataset.hpp"
#include "batchlab/policy/policy.hpp"
#include "batchlab/value/iql.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace batchlab::orchestrator {

/// One row of a run: evaluation of pi_i and the dataset it was trained on.
struct IterationMetrics {
  int iteration = 0;
  double return_mean = 0.0;
  double return_stderr = 0.0;
  std::size_t dataset_trajectories = 0;
  std::size_t dataset_transitions = 0;
  /// Success fraction of the trajectories added at this iteration (demos at 0).
  double new_success_fraction = 0.0;

  friend bool operator==(const IterationMetrics&, const IterationMetrics&) = default;
};

/// Passed to the observer after each iteration is trained and evaluated.
struct IterationArtifacts {
  const IterationMetrics& metrics;
  const policy::Policy& policy;
  const value::ValueHeads* heads;
  std::span<const rollout::Trajectory> new_trajectories;
};

using IterationObserver = std::function<void(const IterationArtifacts&)>;

struct RunReport {
  std::uint64_t seed = 0;
  std::vector<IterationMetrics> iterations;
  DatasetStore dataset;
  std::shared_ptr<const policy::Policy> final_policy;
  std::optional<value::ValueHeads> final_heads;

  double initial_return() const { return iterations.front().return_mean; }
  double final_return() const { return iterations.back().return_mean; }
};

/// Failure inside a run, tagged with the iteration it happened in.
class RunError : public Error {
 public:
  RunError(int iteration, const std::string& what)
      : Error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

/// Batch online RL. Iteration 0 trains pi_0 (plain behaviour cloning) and, for
/// value_rl, Q_0 on scripted demos D_0. Each iteration i = 1..N collects M
/// rollouts with the frozen pi_{i-1} (best-of-N over Q_{i-1} when extraction is
/// implicit), then retrains Q_i and pi_i on the cumulative dataset. Every
/// iteration is evaluated without exploration noise on a fixed seed stream;
/// iteration 0 is evaluated with pi_0 alone. The observer sees each iteration
/// as soon as it finishes. Errors are rethrown as RunError.
RunReport run_experiment(const ExperimentConfig& config, std::uint64_t seed, const IterationObserver& observer = {});

/// Seed streams within a run, exposed for tests.
std::uint64_t stream_seed(std::uint64_t run_seed, int iteration, std::uint64_t stream);
inline constexpr std::uint64_t kDemoStream = 1;
inline constexpr std::uint64_t kValueStream = 2;
inline constexpr std::uint64_t kPolicyStream = 3;
inline constexpr std::uint64_t kCollectStream = 4;
inline constexpr std::uint64_t kEvalStream = 5;

}  // namespace batchlab::orchestrator
