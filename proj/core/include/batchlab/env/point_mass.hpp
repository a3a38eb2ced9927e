#pragma once

#include "batchlab/env/environment.hpp"

#include <nlohmann/json.hpp>

#include <vector>

namespace batchlab::env {

struct Rect {
  double x_lo = 0.0;
  double x_hi = 0.0;
  double y_lo = 0.0;
  double y_hi = 0.0;

  bool contains(double x, double y) const { return x >= x_lo && x <= x_hi && y >= y_lo && y <= y_hi; }
};

struct Disc {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.5;
};

/// Geometry of a 2-D point-mass task with velocity actions in [-1,1]^2.
struct PointMassGeometry {
  Workspace bounds;
  Rect init_box;
  Disc goal;
  std::vector<Rect> walls;
  int horizon = 60;
};

/// 2-D point mass. Position advances by clip(action) * dt per step. The move
/// is resolved in ten substeps; a substep that would enter a wall or leave the
/// workspace keeps only its unblocked axis, so the mass slides along walls.
/// Observation is the position rescaled to [-1,1]^2.
class PointMassEnv : public Environment {
 public:
  PointMassEnv(std::string name, PointMassGeometry geometry, double gamma);

  const MdpSpec& spec() const override { return spec_; }
  EnvState reset(std::uint64_t seed) const override;
  StepResult step(const EnvState& state, std::span<const double> action) const override;
  std::array<double, 2> project(std::span<const double> observation) const override;
  Workspace workspace() const override { return geometry_.bounds; }

  const PointMassGeometry& geometry() const { return geometry_; }
  bool blocked(double x, double y) const;
  bool in_goal(double x, double y) const;
  EnvState make_state(double x, double y, int t) const;

 protected:
  /// Velocity command that moves toward (tx, ty), saturating at unit speed per axis.
  static std::vector<double> toward(double x, double y, double tx, double ty);

  PointMassGeometry geometry_;
  MdpSpec spec_;
  double dt_ = 1.0;
};

/// Open workspace, goal disc in the far corner. Easy task.
class PointReach final : public PointMassEnv {
 public:
  static PointMassGeometry default_geometry();
  PointReach(PointMassGeometry geometry, double gamma) : PointMassEnv("PointReach", std::move(geometry), gamma) {}
  std::vector<double> scripted_action(const EnvState& state, int mode) const override;
};

struct CorridorLayout {
  double wall_y_lo = 4.5;
  double wall_y_hi = 5.5;
  double gap_center = 2.5;
  double gap_width = 1.2;
};

/// Horizontal wall with two gaps between the start region and the goal. The
/// wall blocks the straight line from every start to the goal, so optimal
/// behaviour is bimodal (left or right gap).
class TwoCorridors final : public PointMassEnv {
 public:
  using Layout = CorridorLayout;
  static PointMassGeometry default_geometry(const Layout& layout = Layout{});

  TwoCorridors(PointMassGeometry geometry, Layout layout, double gamma)
      : PointMassEnv("TwoCorridors", std::move(geometry), gamma), layout_(layout) {}

  /// mode 0 uses the left gap, mode 1 the right gap.
  std::vector<double> scripted_action(const EnvState& state, int mode) const override;
  int scripted_modes() const override { return 2; }
  const Layout& layout() const { return layout_; }

  /// Gap a trajectory passed through: -1 left, +1 right, 0 neither.
  int corridor_of(std::span<const std::vector<double>> observations) const;

 private:
  Layout layout_;
};

/// Goal slot at the back of a narrow walled channel. Tight success tolerance.
class PrecisionDock final : public PointMassEnv {
 public:
  static PointMassGeometry default_geometry();
  PrecisionDock(PointMassGeometry geometry, double gamma) : PointMassEnv("PrecisionDock", std::move(geometry), gamma) {}
  std::vector<double> scripted_action(const EnvState& state, int mode) const override;
};

}  // namespace batchlab::env
