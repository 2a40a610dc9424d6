#pragma once

#include <cstdint>
#include <vector>

#include "cibo/problems/problem.hpp"

namespace cibo {

/// Axis-aligned square obstacle.
struct SquareObstacle {
  double cx = 0.0;
  double cy = 0.0;
  double half_width = 0.0;
};

/// Rover trajectory planning in the unit square. The design vector holds
/// num_control_points 2-D points laid out as (x1, y1, x2, y2, ...).
struct RoverSpec {
  std::size_t num_control_points = 30;
  std::vector<SquareObstacle> obstacles;
  double start_x = 0.05, start_y = 0.05;
  double goal_x = 0.95, goal_y = 0.95;
  /// Points sampled uniformly in spline parameter.
  std::size_t trajectory_samples = 400;
  /// When set, start and goal are prepended/appended to the control polygon so
  /// the clamped spline passes through them exactly.
  bool pin_endpoints = true;
  /// Weight of the squared endpoint-miss penalty in the cost.
  double endpoint_penalty = 10.0;

  /// Default task: 30 control points (60 dims) and 15 obstacles laid out by
  /// standard_obstacles(kLayoutSeed).
  static RoverSpec standard(std::size_t num_control_points = 30);
  static constexpr std::uint64_t kLayoutSeed = 0x524F564552ULL;  // "ROVER"
};

/// 15 squares with half-widths in [0.03, 0.06] and centers in [0.15, 0.85]^2,
/// drawn from RandomSource(seed); squares that would cover the default start or
/// goal are redrawn.
std::vector<SquareObstacle> standard_obstacles(std::uint64_t seed, std::size_t count = 15);

/// Clamped uniform cubic B-spline over the control polygon, sampled at
/// spec.trajectory_samples parameter values; returns (samples x 2).
Matrix rover_trajectory(const RoverSpec& spec, const Vector& x);

/// Violation of one obstacle by the polyline through the trajectory samples:
/// -distance(polyline, square) when they are disjoint, otherwise the largest
/// depth (distance to the square boundary) reached inside the square.
double rover_violation(const Matrix& trajectory, const SquareObstacle& obstacle);

/// Polyline length of a sampled trajectory.
double trajectory_length(const Matrix& trajectory);

/// Trajectory cost: length + endpoint_penalty * (|gamma(0) - start|^2 + |gamma(1) - goal|^2).
double rover_cost(const RoverSpec& spec, const Matrix& trajectory);
/// Maximization score, the negated cost.
inline double rover_objective(const RoverSpec& spec, const Matrix& trajectory) {
  return -rover_cost(spec, trajectory);
}

class RoverProblem : public Problem {
 public:
  RoverProblem(RoverSpec spec, bool indicator_mode);

  double benchmark_value(const Vector& x) const override;
  Vector constraint_values(const Vector& x) const override;

  const RoverSpec& rover() const { return rover_; }

 private:
  RoverSpec rover_;
};

}  // namespace cibo
