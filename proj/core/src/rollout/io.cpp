#include "batchlab/rollout/io.hpp"

#include "batchlab/common/error.hpp"

#include <nlohmann/json.hpp>

#include <istream>
#include <ostream>
#include <string>

namespace batchlab::rollout {

namespace {

using nlohmann::json;

Source source_from_string(const std::string& s) {
  if (s == "demo") return Source::demo;
  if (s == "rollout") return Source::rollout;
  throw FormatError("unknown trajectory source '" + s + "'");
}

void append(std::vector<double>& flat, const std::vector<double>& v) { flat.insert(flat.end(), v.begin(), v.end()); }

std::vector<double> slice(const std::vector<double>& flat, std::size_t row, std::size_t width) {
  return {flat.begin() + static_cast<std::ptrdiff_t>(row * width), flat.begin() + static_cast<std::ptrdiff_t>((row + 1) * width)};
}

Trajectory from_json(const json& j) {
  Trajectory t;
  t.seed = j.at("seed").get<std::uint64_t>();
  t.success = j.at("success").get<bool>();
  t.provenance = {source_from_string(j.at("source").get<std::string>()), j.at("iteration").get<int>()};
  const auto len = j.at("length").get<std::size_t>();
  const auto sdim = j.at("state_dim").get<std::size_t>();
  const auto adim = j.at("action_dim").get<std::size_t>();
  const auto states = j.at("states").get<std::vector<double>>();
  const auto actions = j.at("actions").get<std::vector<double>>();
  const auto next = j.at("next_states").get<std::vector<double>>();
  const auto rewards = j.at("rewards").get<std::vector<double>>();
  const auto dones = j.at("dones").get<std::vector<bool>>();
  const auto successes = j.at("successes").get<std::vector<bool>>();
  if (states.size() != len * sdim || next.size() != len * sdim || actions.size() != len * adim ||
      rewards.size() != len || dones.size() != len || successes.size() != len)
    throw FormatError("array lengths disagree with length/state_dim/action_dim");
  for (std::size_t i = 0; i < len; ++i)
    t.transitions.push_back({slice(states, i, sdim), slice(actions, i, adim), rewards[i], slice(next, i, sdim), dones[i],
                             successes[i]});
  return t;
}

}  // namespace

void write_trajectory(std::ostream& out, const Trajectory& t) {
  const std::size_t sdim = t.transitions.empty() ? 0 : t.transitions.front().state.size();
  const std::size_t adim = t.transitions.empty() ? 0 : t.transitions.front().action.size();
  std::vector<double> states, actions, next, rewards;
  std::vector<bool> dones, successes;
  for (const auto& tr : t.transitions) {
    if (tr.state.size() != sdim || tr.next_state.size() != sdim || tr.action.size() != adim)
      throw ShapeError("write_trajectory: ragged transition dimensions");
    append(states, tr.state);
    append(actions, tr.action);
    append(next, tr.next_state);
    rewards.push_back(tr.reward);
    dones.push_back(tr.done);
    successes.push_back(tr.success);
  }
  json j = {{"seed", t.seed},
            {"success", t.success},
            {"source", to_string(t.provenance.source)},
            {"iteration", t.provenance.iteration},
            {"length", t.transitions.size()},
            {"state_dim", sdim},
            {"action_dim", adim},
            {"states", states},
            {"actions", actions},
            {"rewards", rewards},
            {"next_states", next},
            {"dones", dones},
            {"successes", successes}};
  out << j.dump() << '\n';
}

void write_trajectories(std::ostream& out, std::span<const Trajectory> ts) {
  for (const auto& t : ts) write_trajectory(out, t);
}

std::vector<Trajectory> read_trajectories(std::istream& in) {
  std::vector<Trajectory> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    try {
      out.push_back(from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw FormatError("trajectory line " + std::to_string(n) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("trajectory line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::string_view trajectory_schema() {
  return R"schema({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "batchlab trajectory (one JSONL line)",
  "type": "object",
  "required": ["seed", "success", "source", "iteration", "length", "state_dim", "action_dim",
               "states", "actions", "rewards", "next_states", "dones", "successes"],
  "additionalProperties": false,
  "properties": {
    "seed": {"type": "integer", "minimum": 0, "description": "episode seed"},
    "success": {"type": "boolean"},
    "source": {"enum": ["demo", "rollout"]},
    "iteration": {"type": "integer", "minimum": 0, "description": "0 for demos, i for rollouts of iteration i"},
    "length": {"type": "integer", "minimum": 0, "description": "number of transitions L"},
    "state_dim": {"type": "integer", "minimum": 0},
    "action_dim": {"type": "integer", "minimum": 0},
    "states": {"type": "array", "items": {"type": "number"}, "description": "L x state_dim, row-major"},
    "actions": {"type": "array", "items": {"type": "number"}, "description": "L x action_dim, row-major"},
    "rewards": {"type": "array", "items": {"type": "number"}, "description": "length L"},
    "next_states": {"type": "array", "items": {"type": "number"}, "description": "L x state_dim, row-major"},
    "dones": {"type": "array", "items": {"type": "boolean"}, "description": "length L"},
    "successes": {"type": "array", "items": {"type": "boolean"}, "description": "length L"}
  }
}
)schema";
}

}  // namespace batchlab::rollout
