#pragma once

#include "batchlab/policy/policy.hpp"

#include <iosfwd>
#include <memory>

namespace batchlab::policy {

// Policy checkpoint: one JSON header line naming the class, bounds and (for
// diffusion) the schedule, followed by binary network records (see
// nn/checkpoint.hpp). Gaussian: trunk MLP, then the log_std tensor.
// Diffusion: eps_net MLP.

void write_policy(std::ostream& out, const Policy& policy);
std::unique_ptr<Policy> read_policy(std::istream& in);

}  // namespace batchlab::policy
