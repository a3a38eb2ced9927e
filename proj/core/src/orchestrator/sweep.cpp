#include "batchlab/orchestrator/sweep.hpp"

#include "batchlab/common/parallel.hpp"

namespace batchlab::orchestrator {

std::optional<double> SweepResult::mean_final(std::size_t m_index) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    if (const auto f = cell(m_index, s).final_return()) {
      sum += *f;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

SweepResult scaling_sweep(const ExperimentConfig& base, std::span<const std::size_t> m_values,
                          const SweepObserver& observer) {
  if (m_values.empty()) throw ConfigError("axis", "at least one M value is required");
  base.validate();
  SweepResult out{{m_values.begin(), m_values.end()}, base.seeds, {}};
  out.cells.resize(m_values.size() * base.seeds.size());
  const std::size_t runs = out.cells.size();
  const std::size_t jobs = base.jobs;
  parallel_for(runs, jobs, [&](std::size_t k) {
    SweepCell& cell = out.cells[k];
    cell.m = m_values[k / base.seeds.size()];
    cell.seed = base.seeds[k % base.seeds.size()];
    ExperimentConfig cfg = base;
    cfg.rollouts_per_iteration = cell.m;
    // Parallelism goes to runs; a run inside a parallel sweep collects serially.
    if (jobs > 1) cfg.jobs = 1;
    try {
      const RunReport report = run_experiment(cfg, cell.seed);
      for (const auto& row : report.iterations) cell.returns.push_back(row.return_mean);
      if (observer) observer(cell, &report);
    } catch (const std::exception& e) {
      cell.returns.clear();
      cell.error = e.what();
      if (observer) observer(cell, nullptr);
    }
  });
  return out;
}

}  // namespace batchlab::orchestrator
