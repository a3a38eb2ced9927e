#include "batchlab/policy/serialization.hpp"

#include "batchlab/common/error.hpp"
#include "batchlab/nn/checkpoint.hpp"
#include "batchlab/policy/diffusion.hpp"
#include "batchlab/policy/gaussian.hpp"

#include <nlohmann/json.hpp>

#include <istream>
#include <ostream>
#include <string>

namespace batchlab::policy {

void write_policy(std::ostream& out, const Policy& policy) {
  nlohmann::json header{{"action_low", policy.bounds().low}, {"action_high", policy.bounds().high}};
  if (const auto* g = dynamic_cast<const GaussianPolicy*>(&policy)) {
    header["class"] = "gaussian";
    header["mode"] = to_string(g->mode());
    out << header.dump() << '\n';
    nn::write_mlp(out, g->params().trunk);
    nn::write_tensor(out, g->params().log_std);
  } else if (const auto* d = dynamic_cast<const DiffusionPolicy*>(&policy)) {
    const auto& s = d->params().schedule;
    header["class"] = "diffusion";
    header["schedule"] = {{"steps", s.steps}, {"beta_start", s.beta_start}, {"beta_end", s.beta_end}};
    header["clip_x0"] = d->clip_x0();
    out << header.dump() << '\n';
    nn::write_mlp(out, d->params().eps_net);
  } else {
    throw FormatError("write_policy: unsupported policy type");
  }
  if (!out) throw FormatError("write_policy: stream failure");
}

std::unique_ptr<Policy> read_policy(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("policy checkpoint: missing header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
    ActionBounds bounds{header.at("action_low").get<std::vector<double>>(), header.at("action_high").get<std::vector<double>>()};
    const auto cls = header.at("class").get<std::string>();
    if (cls == "gaussian") {
      GaussianPolicyParams p;
      p.trunk = nn::read_mlp(in);
      p.log_std = nn::read_tensor(in);
      return std::make_unique<GaussianPolicy>(std::move(p), std::move(bounds),
                                              sample_mode_from_string(header.at("mode").get<std::string>()));
    }
    if (cls == "diffusion") {
      const auto& s = header.at("schedule");
      DiffusionPolicyParams p;
      p.schedule = DiffusionSchedule::linear(s.at("steps").get<int>(), s.at("beta_start").get<double>(),
                                             s.at("beta_end").get<double>());
      p.eps_net = nn::read_mlp(in);
      return std::make_unique<DiffusionPolicy>(std::move(p), std::move(bounds), header.at("clip_x0").get<bool>());
    }
    throw FormatError("policy checkpoint: unknown class '" + cls + "'");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("policy checkpoint header: ") + e.what());
  }
}

}  // namespace batchlab::policy
