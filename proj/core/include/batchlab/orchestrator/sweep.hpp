#pragma once

#include "batchlab/orchestrator/experiment.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace batchlab::orchestrator {

struct SweepCell {
  std::size_t m = 0;
  std::uint64_t seed = 0;
  /// Per-iteration mean returns; empty when the run failed.
  std::vector<double> returns;
  std::string error;

  bool ok() const { return error.empty(); }
  std::optional<double> final_return() const {
    return returns.empty() ? std::nullopt : std::optional<double>(returns.back());
  }
};

struct SweepResult {
  std::vector<std::size_t> m_values;
  std::vector<std::uint64_t> seeds;
  /// One cell per (M, seed), M-major in the order of m_values and seeds.
  std::vector<SweepCell> cells;

  const SweepCell& cell(std::size_t m_index, std::size_t seed_index) const { return cells[m_index * seeds.size() + seed_index]; }
  /// Mean final return over the seeds that completed for m_values[m_index].
  std::optional<double> mean_final(std::size_t m_index) const;
};

/// Called after each run completes, from the worker that ran it.
using SweepObserver = std::function<void(const SweepCell&, const RunReport*)>;

/// Independent runs of `base` for every M in `m_values` and every seed in
/// base.seeds. Failed runs are recorded with their message and the sweep continues.
/// Runs fan out over base.jobs workers; each run then collects serially.
SweepResult scaling_sweep(const ExperimentConfig& base, std::span<const std::size_t> m_values,
                          const SweepObserver& observer = {});

}  // namespace batchlab::orchestrator
