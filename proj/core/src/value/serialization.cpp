#include "batchlab/value/serialization.hpp"

#include "batchlab/common/error.hpp"
#include "batchlab/nn/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include <istream>
#include <ostream>

namespace batchlab::value {

void write_value_heads(std::ostream& out, const ValueHeads& heads) {
  nlohmann::json header{{"tau", heads.tau},
                        {"gamma", heads.gamma},
                        {"twin_q", heads.q2_net.has_value()},
                        {"topology", {{"q", heads.q_net.layer_sizes}, {"v", heads.v_net.layer_sizes}}}};
  out << header.dump() << '\n';
  nn::write_mlp(out, heads.q_net);
  nn::write_mlp(out, heads.q_target_net);
  nn::write_mlp(out, heads.v_net);
  if (heads.q2_net) {
    nn::write_mlp(out, *heads.q2_net);
    nn::write_mlp(out, *heads.q2_target_net);
  }
  if (!out) throw FormatError("write_value_heads: stream failure");
}

ValueHeads read_value_heads(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("value checkpoint: missing header");
  try {
    const auto header = nlohmann::json::parse(line);
    ValueHeads h;
    h.tau = header.at("tau").get<double>();
    h.gamma = header.at("gamma").get<double>();
    h.q_net = nn::read_mlp(in);
    h.q_target_net = nn::read_mlp(in);
    h.v_net = nn::read_mlp(in);
    if (header.at("twin_q").get<bool>()) {
      h.q2_net = nn::read_mlp(in);
      h.q2_target_net = nn::read_mlp(in);
    }
    if (h.q_net.layer_sizes != header.at("topology").at("q").get<std::vector<std::size_t>>() ||
        h.v_net.layer_sizes != header.at("topology").at("v").get<std::vector<std::size_t>>() ||
        h.q_net.layer_sizes != h.q_target_net.layer_sizes)
      throw FormatError("value checkpoint: topology does not match header");
    return h;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("value checkpoint header: ") + e.what());
  }
}

}  // namespace batchlab::value
