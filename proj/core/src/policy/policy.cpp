#include "batchlab/policy/policy.hpp"

#include "batchlab/common/error.hpp"

#include <algorithm>

namespace batchlab::policy {

std::string to_string(PolicyClass c) { return c == PolicyClass::gaussian ? "gaussian" : "diffusion"; }

PolicyClass policy_class_from_string(const std::string& name) {
  if (name == "gaussian") return PolicyClass::gaussian;
  if (name == "diffusion") return PolicyClass::diffusion;
  throw Error("unknown policy class '" + name + "'");
}

double ActionBounds::clip(double a, std::size_t d) const { return std::clamp(a, low[d], high[d]); }

}  // namespace batchlab::policy
