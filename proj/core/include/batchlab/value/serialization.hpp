#pragma once

#include "batchlab/value/iql.hpp"

#include <iosfwd>

namespace batchlab::value {

// Value checkpoint: JSON header line {"tau", "gamma", "twin_q", "topology"}
// followed by network records in the order q, q_target, v[, q2, q2_target].

void write_value_heads(std::ostream& out, const ValueHeads& heads);
ValueHeads read_value_heads(std::istream& in);

}  // namespace batchlab::value
