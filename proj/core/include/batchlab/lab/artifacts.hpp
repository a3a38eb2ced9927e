#pragma once

#include "batchlab/orchestrator/experiment.hpp"
#include "batchlab/orchestrator/histogram.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace batchlab::lab {

/// Writes `content` to a sibling temp file, then renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);

/// MANIFEST lines "<sha256>  <relative path>" for every regular file under
/// `dir` except MANIFEST itself, sorted by path (sha256sum -c compatible).
void write_manifest(const std::filesystem::path& dir);
/// Recomputes every hash listed in dir/MANIFEST; returns the mismatching paths.
std::vector<std::string> verify_manifest(const std::filesystem::path& dir);

/// One metrics JSONL row. Key order is fixed so output is byte-stable.
std::string metrics_row(const std::string& run_id, std::uint64_t seed, const orchestrator::IterationMetrics& m);
orchestrator::IterationMetrics parse_metrics_row(const std::string& line);

/// B lines of B comma-separated counts; line iy is the iy-th y interval from the bottom.
std::string histogram_csv(const orchestrator::Histogram& h);

/// "<env>_<algorithm>_seed<S>_<hash>", where the hash covers the config minus
/// jobs and the seed list. Independent of the output path, so reruns match.
std::string default_run_id(const orchestrator::ExperimentConfig& config, std::uint64_t seed);

struct RunOptions {
  std::filesystem::path dir;
  std::string run_id;  // default_run_id when empty
  std::size_t histogram_bins = 40;
  bool checkpoints = true;
};

/// run_experiment writing a run directory:
///   config.json, metrics.jsonl (rewritten atomically after every iteration),
///   trajectory.schema.json, trajectories/iter_NNN.jsonl,
///   checkpoints/iter_NNN/{policy,value}.ckpt, histograms/iter_NNN_{all,success}.csv,
///   histograms/cumulative_{all,success}.csv, MANIFEST.
/// On failure the files of completed iterations and a MANIFEST are kept and
/// the error is rethrown.
orchestrator::RunReport execute_run(const orchestrator::ExperimentConfig& config, std::uint64_t seed,
                                    const RunOptions& options);

struct Checkpoint {
  std::unique_ptr<policy::Policy> policy;
  std::optional<value::ValueHeads> heads;
};

/// Loads checkpoints/iter_NNN of a run directory; a negative iteration picks
/// the latest one. Throws FormatError when the checkpoint is missing or corrupt.
Checkpoint load_checkpoint(const std::filesystem::path& dir, int iteration = -1);

/// Parsed config.json of a run directory.
orchestrator::ExperimentConfig load_run_config(const std::filesystem::path& dir);

/// All trajectories stored in a run directory, in iteration order.
std::vector<rollout::Trajectory> load_run_trajectories(const std::filesystem::path& dir);

}  // namespace batchlab::lab
