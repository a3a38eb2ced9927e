#pragma once

#include "batchlab/orchestrator/config.hpp"
#include "batchlab/orchestrator/histogram.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace batchlab::lab {

/// "M=50,100,200" -> {50, 100, 200}. Throws ConfigError("axis") on anything else.
std::vector<std::size_t> parse_axis(const std::string& text);

struct SweepRow {
  std::size_t m = 0;
  std::uint64_t seed = 0;
  std::optional<double> final_return;
  std::string error;
};

/// One run directory per (M, seed) under out/runs/M<m>_seed<s>, at most
/// config.jobs runs at a time. sweep.csv is rendered from the runs' metrics
/// files: one column per M, one row per seed, then "mean" and "error" rows.
/// Failed runs appear as null with their message in the error row.
std::vector<SweepRow> run_sweep(const orchestrator::ExperimentConfig& config, const std::vector<std::size_t>& m_values,
                                const std::filesystem::path& out);

std::string render_sweep_csv(const std::vector<std::size_t>& m_values, const std::vector<std::uint64_t>& seeds,
                             const std::vector<SweepRow>& rows);

struct HeatmapEntry {
  std::filesystem::path run;
  orchestrator::Histogram histogram;
  std::size_t nonzero_cells = 0;
};

/// Visitation histograms over all stored trajectories of each run. Writes
/// <out>/<k>_<run dir name>.csv per run and <out>/summary.csv. Throws
/// FormatError if a run has no trajectories.
std::vector<HeatmapEntry> render_heatmaps(const std::vector<std::filesystem::path>& runs, std::size_t bins,
                                          bool success_only, const std::filesystem::path& out);

}  // namespace batchlab::lab
