#include "batchlab/env/registry.hpp"

#include "batchlab/common/error.hpp"
#include "batchlab/common/rng.hpp"
#include "batchlab/env/chain.hpp"
#include "batchlab/env/point_mass.hpp"

#include <set>

namespace batchlab::env {

namespace {

using nlohmann::json;

json rect_json(const Rect& r) { return json::array({r.x_lo, r.x_hi, r.y_lo, r.y_hi}); }

Rect rect_from(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 4) throw ConfigError("env_params." + key, "expected [x_lo, x_hi, y_lo, y_hi]");
  return Rect{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

Disc disc_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("env_params.goal", "expected [x, y, radius]");
  return Disc{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void reject_unknown(const json& params, const json& defaults) {
  if (params.is_null()) return;
  if (!params.is_object()) throw ConfigError("env_params", "expected an object");
  for (const auto& [key, value] : params.items())
    if (!defaults.contains(key)) throw ConfigError("env_params." + key, "unknown environment parameter");
}

json point_mass_json(const PointMassGeometry& g) {
  return json{{"init_box", rect_json(g.init_box)},
              {"goal", json::array({g.goal.x, g.goal.y, g.goal.radius})},
              {"horizon", g.horizon},
              {"scale", 1.0}};
}

Rect scaled(const Rect& r, double s) { return Rect{r.x_lo * s, r.x_hi * s, r.y_lo * s, r.y_hi * s}; }

double scale_of(const json& params) {
  if (params.is_null() || !params.contains("scale")) return 1.0;
  const double s = params["scale"].get<double>();
  if (!(s > 0.0)) throw ConfigError("env_params.scale", "must be positive");
  return s;
}

// Lengths multiply by s; the per-step displacement bound stays 1.
void scale_geometry(PointMassGeometry& g, double s) {
  g.bounds = {g.bounds.x_lo * s, g.bounds.x_hi * s, g.bounds.y_lo * s, g.bounds.y_hi * s};
  g.init_box = scaled(g.init_box, s);
  g.goal = Disc{g.goal.x * s, g.goal.y * s, g.goal.radius * s};
  for (auto& w : g.walls) w = scaled(w, s);
}

void apply_point_mass(const json& params, PointMassGeometry& g) {
  if (params.is_null()) return;
  try {
    if (params.contains("init_box")) g.init_box = rect_from(params["init_box"], "init_box");
    if (params.contains("goal")) g.goal = disc_from(params["goal"]);
    if (params.contains("horizon")) g.horizon = params["horizon"].get<int>();
  } catch (const json::exception& e) {
    throw ConfigError("env_params", e.what());
  }
}

}  // namespace


std::vector<std::string> environment_names() { return {"PointReach", "TwoCorridors", "PrecisionDock", "Chain5"}; }

json default_env_params(const std::string& name) {
  if (name == "PointReach") return point_mass_json(PointReach::default_geometry());
  if (name == "PrecisionDock") return point_mass_json(PrecisionDock::default_geometry());
  if (name == "TwoCorridors") {
    TwoCorridors::Layout layout;
    json j = point_mass_json(TwoCorridors::default_geometry(layout));
    j["wall_y_lo"] = layout.wall_y_lo;
    j["wall_y_hi"] = layout.wall_y_hi;
    j["gap_center"] = layout.gap_center;
    j["gap_width"] = layout.gap_width;
    return j;
  }
  if (name == "Chain5") return json{{"horizon", 20}};
  throw ConfigError("env", "unknown environment '" + name + "'");
}

std::unique_ptr<Environment> make_environment(const std::string& name, const json& params, double gamma) {
  const json defaults = default_env_params(name);
  reject_unknown(params, defaults);
  try {
    if (name == "PointReach") {
      auto g = PointReach::default_geometry();
      apply_point_mass(params, g);
      scale_geometry(g, scale_of(params));
      return std::make_unique<PointReach>(g, gamma);
    }
    if (name == "PrecisionDock") {
      auto g = PrecisionDock::default_geometry();
      apply_point_mass(params, g);
      scale_geometry(g, scale_of(params));
      return std::make_unique<PrecisionDock>(g, gamma);
    }
    if (name == "TwoCorridors") {
      TwoCorridors::Layout layout;
      if (!params.is_null()) {
        layout.wall_y_lo = params.value("wall_y_lo", layout.wall_y_lo);
        layout.wall_y_hi = params.value("wall_y_hi", layout.wall_y_hi);
        layout.gap_center = params.value("gap_center", layout.gap_center);
        layout.gap_width = params.value("gap_width", layout.gap_width);
      }
      auto g = TwoCorridors::default_geometry(layout);
      apply_point_mass(params, g);
      const double s = scale_of(params);
      scale_geometry(g, s);
      layout = {layout.wall_y_lo * s, layout.wall_y_hi * s, layout.gap_center * s, layout.gap_width * s};
      return std::make_unique<TwoCorridors>(g, layout, gamma);
    }
    // Chain5
    const int horizon = params.is_null() ? 20 : params.value("horizon", 20);
    return std::make_unique<Chain5>(gamma, horizon);
  } catch (const json::exception& e) {
    throw ConfigError("env_params", e.what());
  } catch (const EnvError& e) {
    throw ConfigError("env_params", e.what());
  }
}

std::vector<rollout::Trajectory> scripted_demos(const Environment& env, int n, double noise_scale, std::uint64_t seed) {
  if (n < 1) throw EnvError("scripted_demos: n must be >= 1");
  std::vector<rollout::Trajectory> demos;
  demos.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    rollout::Trajectory traj;
    traj.seed = derive_seed({seed, 0xde30u, static_cast<std::uint64_t>(i)});
    traj.provenance = {rollout::Source::demo, 0};
    Rng rng(traj.seed);
    const int mode = i % env.scripted_modes();
    EnvState state = env.reset(traj.seed);
    while (!state.done) {
      auto action = env.scripted_action(state, mode);
      for (double& a : action) a += noise_scale * rng.normal();
      action = env.clip_action(action);
      auto [next, reward] = env.step(state, action);
      traj.transitions.push_back(rollout::Transition{state.observation.to_vector(), action, reward,
                                                     next.observation.to_vector(), next.done, next.success});
      state = std::move(next);
    }
    traj.success = state.success;
    if (!traj.success)
      throw EnvError(env.spec().name + ": scripted controller failed on demo " + std::to_string(i) +
                     " (environment misconfigured or noise too large)");
    demos.push_back(std::move(traj));
  }
  return demos;
}

}  // namespace batchlab::env
