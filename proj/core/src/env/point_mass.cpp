#include "batchlab/env/point_mass.hpp"

#include "batchlab/common/error.hpp"
#include "batchlab/common/rng.hpp"

#include <algorithm>
#include <cmath>

namespace batchlab::env {

namespace {

constexpr int kSubsteps = 10;

}  // namespace

std::vector<double> Environment::clip_action(std::span<const double> action) const {
  const auto& s = spec();
  if (action.size() != s.action_dim)
    throw EnvError(s.name + ": action has " + std::to_string(action.size()) + " dims, expected " +
                   std::to_string(s.action_dim));
  std::vector<double> out(action.begin(), action.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (std::isnan(out[i])) throw EnvError(s.name + ": NaN action");
    out[i] = std::clamp(out[i], s.action_low[i], s.action_high[i]);
  }
  return out;
}

PointMassEnv::PointMassEnv(std::string name, PointMassGeometry geometry, double gamma)
    : geometry_(std::move(geometry)) {
  const auto& b = geometry_.bounds;
  const auto& box = geometry_.init_box;
  if (!(b.x_lo < b.x_hi && b.y_lo < b.y_hi)) throw EnvError(name + ": empty workspace");
  if (!(box.x_lo <= box.x_hi && box.y_lo <= box.y_hi)) throw EnvError(name + ": empty init box");
  if (geometry_.horizon < 1) throw EnvError(name + ": horizon must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) throw EnvError(name + ": gamma must lie in (0,1)");
  if (geometry_.goal.radius <= 0.0) throw EnvError(name + ": goal radius must be positive");
  spec_ = MdpSpec{std::move(name), 2, 2, {-1.0, -1.0}, {1.0, 1.0}, geometry_.horizon, gamma};
}

bool PointMassEnv::blocked(double x, double y) const {
  const auto& b = geometry_.bounds;
  if (x < b.x_lo || x > b.x_hi || y < b.y_lo || y > b.y_hi) return true;
  return std::any_of(geometry_.walls.begin(), geometry_.walls.end(), [&](const Rect& r) { return r.contains(x, y); });
}

bool PointMassEnv::in_goal(double x, double y) const {
  const auto& g = geometry_.goal;
  return std::hypot(x - g.x, y - g.y) <= g.radius;
}

EnvState PointMassEnv::make_state(double x, double y, int t) const {
  const auto& b = geometry_.bounds;
  EnvState s;
  s.position = {x, y};
  s.observation = nn::Tensor::row({2.0 * (x - b.x_lo) / (b.x_hi - b.x_lo) - 1.0, 2.0 * (y - b.y_lo) / (b.y_hi - b.y_lo) - 1.0});
  s.t = t;
  return s;
}

EnvState PointMassEnv::reset(std::uint64_t seed) const {
  Rng rng(seed);
  const auto& box = geometry_.init_box;
  // Rejection keeps the start outside walls if an override places the box over one.
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double x = rng.uniform(box.x_lo, box.x_hi);
    const double y = rng.uniform(box.y_lo, box.y_hi);
    if (!blocked(x, y) && !in_goal(x, y)) return make_state(x, y, 0);
  }
  throw EnvError(spec_.name + ": init box has no free start position");
}

StepResult PointMassEnv::step(const EnvState& state, std::span<const double> action) const {
  if (state.done) throw EnvError(spec_.name + ": step called after episode end");
  const auto a = clip_action(action);
  const double x0 = state.position[0];
  const double y0 = state.position[1];
  double x = x0;
  double y = y0;
  bool contact = false;
  const double sx = a[0] * dt_ / kSubsteps;
  const double sy = a[1] * dt_ / kSubsteps;
  for (int k = 0; k < kSubsteps; ++k) {
    if (!blocked(x + sx, y + sy)) {
      x += sx;
      y += sy;
      continue;
    }
    // Slide: drop the blocked component of the substep.
    contact = true;
    if (!blocked(x + sx, y)) {
      x += sx;
    } else if (!blocked(x, y + sy)) {
      y += sy;
    }
  }
  if (!contact) {
    x = x0 + a[0] * dt_;
    y = y0 + a[1] * dt_;
  }
  StepResult r;
  r.state = make_state(x, y, state.t + 1);
  r.state.success = in_goal(x, y);
  r.state.done = r.state.success || r.state.t >= spec_.horizon;
  r.reward = r.state.success ? 1.0 : 0.0;
  return r;
}

std::array<double, 2> PointMassEnv::project(std::span<const double> observation) const {
  const auto& b = geometry_.bounds;
  return {b.x_lo + (observation[0] + 1.0) * 0.5 * (b.x_hi - b.x_lo),
          b.y_lo + (observation[1] + 1.0) * 0.5 * (b.y_hi - b.y_lo)};
}

std::vector<double> PointMassEnv::toward(double x, double y, double tx, double ty) {
  double vx = tx - x;
  double vy = ty - y;
  const double m = std::max(std::abs(vx), std::abs(vy));
  if (m > 1.0) {
    vx /= m;
    vy /= m;
  }
  return {vx, vy};
}

PointMassGeometry PointReach::default_geometry() {
  PointMassGeometry g;
  g.bounds = {0.0, 10.0, 0.0, 10.0};
  g.init_box = {1.0, 3.0, 1.0, 3.0};
  g.goal = {8.0, 8.0, 0.5};
  g.horizon = 60;
  return g;
}

std::vector<double> PointReach::scripted_action(const EnvState& state, int) const {
  return toward(state.position[0], state.position[1], geometry_.goal.x, geometry_.goal.y);
}

PointMassGeometry TwoCorridors::default_geometry(const Layout& layout) {
  PointMassGeometry g;
  g.bounds = {-5.0, 5.0, 0.0, 10.0};
  g.init_box = {-1.0, 1.0, 0.5, 1.5};
  g.goal = {0.0, 9.0, 0.75};
  g.horizon = 60;
  const double half = layout.gap_width / 2.0;
  const double c = layout.gap_center;
  g.walls = {
      Rect{-5.0, -c - half, layout.wall_y_lo, layout.wall_y_hi},
      Rect{-c + half, c - half, layout.wall_y_lo, layout.wall_y_hi},
      Rect{c + half, 5.0, layout.wall_y_lo, layout.wall_y_hi},
  };
  return g;
}

std::vector<double> TwoCorridors::scripted_action(const EnvState& state, int mode) const {
  const double x = state.position[0];
  const double y = state.position[1];
  const double gx = mode == 0 ? -layout_.gap_center : layout_.gap_center;
  if (y <= layout_.wall_y_hi) {
    if (std::abs(x - gx) <= 0.25 * layout_.gap_width) return toward(x, y, gx, layout_.wall_y_hi + 0.7);
    return toward(x, y, gx, layout_.wall_y_lo - 0.6);
  }
  return toward(x, y, geometry_.goal.x, geometry_.goal.y);
}

int TwoCorridors::corridor_of(std::span<const std::vector<double>> observations) const {
  for (const auto& obs : observations) {
    const auto p = project(obs);
    if (p[1] >= layout_.wall_y_lo && p[1] <= layout_.wall_y_hi) return p[0] < 0.0 ? -1 : 1;
  }
  return 0;
}

PointMassGeometry PrecisionDock::default_geometry() {
  PointMassGeometry g;
  g.bounds = {0.0, 10.0, 0.0, 10.0};
  g.init_box = {1.0, 3.0, 2.0, 8.0};
  g.goal = {9.0, 5.0, 0.2};
  g.horizon = 80;
  g.walls = {
      Rect{6.0, 10.0, 5.4, 6.0},
      Rect{6.0, 10.0, 4.0, 4.6},
      Rect{9.5, 10.0, 4.6, 5.4},
  };
  return g;
}

std::vector<double> PrecisionDock::scripted_action(const EnvState& state, int) const {
  const double x = state.position[0];
  const double y = state.position[1];
  const double entry_x = 5.5;
  const auto& goal = geometry_.goal;
  if (x < 5.9 && (x < entry_x - 0.05 || std::abs(y - goal.y) > 0.15)) return toward(x, y, entry_x, goal.y);
  return toward(x, y, goal.x, goal.y);
}

}  // namespace batchlab::env
