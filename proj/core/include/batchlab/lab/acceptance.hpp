#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace batchlab::lab {

/// Outcome of one acceptance criterion. `measured` holds the numbers the
/// verdict was computed from; `detail` is the one-line human summary.
struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  nlohmann::ordered_json measured = nlohmann::ordered_json::object();
  double seconds = 0.0;
};

struct AcceptanceOptions {
  /// Scratch space for run directories; created if missing.
  std::filesystem::path work_dir = "accept";
  /// Reduced-cost profile (see apply_fast_profile) for the run-based criteria.
  bool fast = false;
  /// Criterion ids to run; empty runs all ten.
  std::vector<int> only;
  /// Damages the stored value checkpoint before criterion 3 reloads it.
  bool corrupt_checkpoint = false;
  std::size_t jobs = 1;
  /// CLI executable spawned by criterion 10; the criterion fails if it is empty.
  std::filesystem::path cli;
};

inline constexpr int kCriterionCount = 10;

using CriterionObserver = std::function<void(const CriterionResult&)>;

/// Runs the selected criteria in id order. A criterion that throws is
/// recorded as failed with the exception message.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, const CriterionObserver& observer = {});

/// "PASS  3 iql-oracle: ..." per criterion, then a summary line naming the
/// failed ids. Contains no timings, so repeated runs render identically.
std::string render_acceptance_text(const std::vector<CriterionResult>& results);
nlohmann::ordered_json acceptance_json(const std::vector<CriterionResult>& results);

}  // namespace batchlab::lab
