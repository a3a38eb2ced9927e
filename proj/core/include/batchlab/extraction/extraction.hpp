#pragma once

#include "batchlab/policy/config.hpp"
#include "batchlab/policy/policy.hpp"
#include "batchlab/rollout/transition_table.hpp"
#include "batchlab/value/critic.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace batchlab::extraction {

enum class ExtractionKind { none_il, filtered_il, awr_explicit, best_of_n_implicit };
std::string to_string(ExtractionKind k);
ExtractionKind extraction_kind_from_string(const std::string& name);

struct ExtractionSpec {
  ExtractionKind kind = ExtractionKind::best_of_n_implicit;
  double beta = 3.0;
  std::size_t n_samples = 64;
  double weight_clip = 100.0;
  /// Also apply best-of-N selection at rollout time for awr_explicit policies.
  bool explicit_best_of_n = false;

  /// Number of candidate actions drawn per rollout step (1 means plain sampling).
  std::size_t rollout_candidates() const;
  bool needs_critic() const { return kind == ExtractionKind::awr_explicit || kind == ExtractionKind::best_of_n_implicit; }

  friend bool operator==(const ExtractionSpec&, const ExtractionSpec&) = default;
};

/// min(exp(beta * (Q(s,a) - V(s))), clip).
double awr_weight(const value::Critic& critic, std::span<const double> state, std::span<const double> action, double beta,
                  double clip);
/// awr_weight for every row of the table, computed in one batched pass.
std::vector<double> awr_weights(const value::Critic& critic, const rollout::TransitionTable& table, double beta,
                                double clip);

/// Receives the table rows of every training minibatch.
using BatchObserver = std::function<void(std::span<const std::size_t>)>;

/// UpdatePolicy. none_il and best_of_n_implicit: uniform behaviour cloning;
/// filtered_il: behaviour cloning on rows from successful trajectories only;
/// awr_explicit: per-row AWR weights on the likelihood (Gaussian) or
/// noise-prediction (diffusion) loss. Throws DataError on an empty filtered set.
std::unique_ptr<policy::Policy> train_policy(const rollout::TransitionTable& table, const value::Critic* critic,
                                             const ExtractionSpec& spec, const policy::PolicyConfig& config,
                                             const policy::ActionBounds& bounds, std::uint64_t seed,
                                             const policy::Policy* warm_start = nullptr,
                                             const BatchObserver& observer = {});

/// Draws n candidates from the policy and returns the one with the highest Q;
/// ties go to the lowest index. n == 1 or a null critic returns the first sample.
std::vector<double> select_action(const policy::Policy& policy, const value::Critic* critic,
                                  std::span<const double> state, std::size_t n, std::uint64_t seed);

}  // namespace batchlab::extraction
