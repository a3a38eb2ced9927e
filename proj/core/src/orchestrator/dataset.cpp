#include "batchlab/orchestrator/dataset.hpp"

#include "batchlab/common/error.hpp"

namespace batchlab::orchestrator {

void DatasetStore::add(int iteration, std::vector<rollout::Trajectory> batch) {
  if (iteration != last_iteration() + 1)
    throw DataError("DatasetStore: expected iteration " + std::to_string(last_iteration() + 1) + ", got " +
                    std::to_string(iteration));
  offsets_.push_back(trajectories_.size());
  for (auto& t : batch) {
    transitions_ += t.length();
    successes_ += t.success ? 1 : 0;
    trajectories_.push_back(std::move(t));
  }
}

std::span<const rollout::Trajectory> DatasetStore::iteration(int i) const {
  if (i < 0 || i > last_iteration()) throw DataError("DatasetStore: no iteration " + std::to_string(i));
  const std::size_t begin = offsets_[static_cast<std::size_t>(i)];
  const std::size_t end = i == last_iteration() ? trajectories_.size() : offsets_[static_cast<std::size_t>(i) + 1];
  return std::span<const rollout::Trajectory>(trajectories_).subspan(begin, end - begin);
}

}  // namespace batchlab::orchestrator
