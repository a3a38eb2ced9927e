#include "batchlab/orchestrator/histogram.hpp"

#include "batchlab/common/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace batchlab::orchestrator {

std::uint64_t Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

std::size_t Histogram::nonzero_cells() const {
  return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }));
}

namespace {

std::size_t bin_of(double v, double lo, double hi, std::size_t bins) {
  const double f = std::floor((v - lo) / (hi - lo) * static_cast<double>(bins));
  if (!(f > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(f), bins - 1);
}

}  // namespace

Histogram visitation_histogram(const env::Environment& env, std::span<const rollout::Trajectory> trajectories,
                               std::size_t bins, bool success_only) {
  if (bins == 0) throw Error("visitation_histogram: bins must be >= 1");
  const auto ws = env.workspace();
  Histogram h{bins, std::vector<std::uint64_t>(bins * bins, 0)};
  for (const auto& t : trajectories) {
    if (success_only && !t.success) continue;
    for (const auto& tr : t.transitions) {
      const auto p = env.project(tr.state);
      ++h.counts[bin_of(p[1], ws.y_lo, ws.y_hi, bins) * bins + bin_of(p[0], ws.x_lo, ws.x_hi, bins)];
    }
  }
  return h;
}

}  // namespace batchlab::orchestrator
