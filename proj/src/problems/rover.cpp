#include "cibo/problems/rover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cibo/numerics/random.hpp"

namespace cibo {

namespace {

/// Cox-de Boor evaluation of a clamped uniform B-spline of the given degree.
Eigen::RowVector2d de_boor(const Matrix& control, int degree, double u) {
  const int m = static_cast<int>(control.rows());
  const int spans = m - degree;  // number of non-degenerate knot spans
  // Knot t_j for j in [0, m + degree].
  auto knot = [&](int j) {
    if (j <= degree) return 0.0;
    if (j >= m) return 1.0;
    return static_cast<double>(j - degree) / spans;
  };
  int k = degree + static_cast<int>(std::floor(u * spans));
  k = std::clamp(k, degree, m - 1);
  std::vector<Eigen::RowVector2d> d(static_cast<std::size_t>(degree + 1));
  for (int j = 0; j <= degree; ++j) d[static_cast<std::size_t>(j)] = control.row(j + k - degree);
  for (int r = 1; r <= degree; ++r) {
    for (int j = degree; j >= r; --j) {
      const double left = knot(j + k - degree);
      const double right = knot(j + 1 + k - r);
      const double alpha = right > left ? (u - left) / (right - left) : 0.0;
      d[static_cast<std::size_t>(j)] =
          (1.0 - alpha) * d[static_cast<std::size_t>(j - 1)] + alpha * d[static_cast<std::size_t>(j)];
    }
  }
  return d[static_cast<std::size_t>(degree)];
}

struct Point {
  double x, y;
};

double square_depth(const SquareObstacle& o, Point p) {
  return o.half_width - std::max(std::abs(p.x - o.cx), std::abs(p.y - o.cy));
}

double point_square_distance(const SquareObstacle& o, Point p) {
  const double dx = std::max(std::abs(p.x - o.cx) - o.half_width, 0.0);
  const double dy = std::max(std::abs(p.y - o.cy) - o.half_width, 0.0);
  return std::hypot(dx, dy);
}

double point_segment_distance(Point p, Point a, Point b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len_sq = vx * vx + vy * vy;
  double t = 0.0;
  if (len_sq > 0.0) t = std::clamp(((p.x - a.x) * vx + (p.y - a.y) * vy) / len_sq, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

/// Max over the segment of the (concave, piecewise-linear) depth function.
double segment_max_depth(const SquareObstacle& o, Point a, Point b) {
  const double ax = a.x - o.cx, ay = a.y - o.cy;
  const double vx = b.x - a.x, vy = b.y - a.y;
  double best = std::max(square_depth(o, a), square_depth(o, b));
  auto probe = [&](double num, double den) {
    if (den == 0.0) return;
    const double t = num / den;
    if (t > 0.0 && t < 1.0) best = std::max(best, square_depth(o, {a.x + t * vx, a.y + t * vy}));
  };
  probe(-ax, vx);             // dx(t) = 0
  probe(-ay, vy);             // dy(t) = 0
  probe(ay - ax, vx - vy);    // dx(t) = dy(t)
  probe(-(ax + ay), vx + vy); // dx(t) = -dy(t)
  return best;
}

double segment_square_distance(const SquareObstacle& o, Point a, Point b) {
  double best = std::min(point_square_distance(o, a), point_square_distance(o, b));
  const double w = o.half_width;
  const Point corners[4] = {{o.cx - w, o.cy - w}, {o.cx + w, o.cy - w}, {o.cx + w, o.cy + w},
                            {o.cx - w, o.cy + w}};
  for (const Point& c : corners) best = std::min(best, point_segment_distance(c, a, b));
  return best;
}

Point row_point(const Matrix& traj, Eigen::Index i) { return {traj(i, 0), traj(i, 1)}; }

}  // namespace

RoverSpec RoverSpec::standard(std::size_t num_control_points) {
  RoverSpec s;
  s.num_control_points = num_control_points;
  s.obstacles = standard_obstacles(kLayoutSeed);
  return s;
}

std::vector<SquareObstacle> standard_obstacles(std::uint64_t seed, std::size_t count) {
  RandomSource rng(seed);
  const RoverSpec defaults;
  std::vector<SquareObstacle> out;
  while (out.size() < count) {
    SquareObstacle o;
    o.half_width = rng.uniform(0.03, 0.06);
    o.cx = rng.uniform(0.15, 0.85);
    o.cy = rng.uniform(0.15, 0.85);
    const double margin = o.half_width + 0.05;
    const bool covers_start = std::abs(o.cx - defaults.start_x) < margin &&
                              std::abs(o.cy - defaults.start_y) < margin;
    const bool covers_goal = std::abs(o.cx - defaults.goal_x) < margin &&
                             std::abs(o.cy - defaults.goal_y) < margin;
    if (!covers_start && !covers_goal) out.push_back(o);
  }
  return out;
}

Matrix rover_trajectory(const RoverSpec& spec, const Vector& x) {
  const auto n = static_cast<Eigen::Index>(spec.num_control_points);
  if (x.size() != 2 * n) {
    throw ProblemError("rover_trajectory: expected " + std::to_string(2 * n) + " coordinates");
  }
  const Eigen::Index extra = spec.pin_endpoints ? 2 : 0;
  Matrix control(n + extra, 2);
  Eigen::Index row = 0;
  if (spec.pin_endpoints) control.row(row++) << spec.start_x, spec.start_y;
  for (Eigen::Index i = 0; i < n; ++i) control.row(row++) << x[2 * i], x[2 * i + 1];
  if (spec.pin_endpoints) control.row(row++) << spec.goal_x, spec.goal_y;

  const int degree = static_cast<int>(std::min<Eigen::Index>(3, control.rows() - 1));
  const auto samples = static_cast<Eigen::Index>(std::max<std::size_t>(2, spec.trajectory_samples));
  Matrix traj(samples, 2);
  if (degree == 0) {
    traj.rowwise() = control.row(0);
    return traj;
  }
  for (Eigen::Index j = 0; j < samples; ++j) {
    const double u = static_cast<double>(j) / static_cast<double>(samples - 1);
    traj.row(j) = de_boor(control, degree, u);
  }
  // The clamped spline interpolates its end control points; pin them exactly.
  traj.row(0) = control.row(0);
  traj.row(samples - 1) = control.row(control.rows() - 1);
  return traj;
}

double rover_violation(const Matrix& trajectory, const SquareObstacle& obstacle) {
  if (trajectory.rows() == 0 || trajectory.cols() != 2) {
    throw ProblemError("rover_violation: trajectory must be a non-empty (n x 2) array");
  }
  double depth = square_depth(obstacle, row_point(trajectory, 0));
  for (Eigen::Index i = 0; i + 1 < trajectory.rows(); ++i) {
    depth = std::max(depth, segment_max_depth(obstacle, row_point(trajectory, i),
                                              row_point(trajectory, i + 1)));
  }
  if (depth >= 0.0) return depth;
  double dist = point_square_distance(obstacle, row_point(trajectory, 0));
  for (Eigen::Index i = 0; i + 1 < trajectory.rows(); ++i) {
    dist = std::min(dist, segment_square_distance(obstacle, row_point(trajectory, i),
                                                  row_point(trajectory, i + 1)));
  }
  return -dist;
}

double trajectory_length(const Matrix& trajectory) {
  double total = 0.0;
  for (Eigen::Index i = 0; i + 1 < trajectory.rows(); ++i) {
    total += (trajectory.row(i + 1) - trajectory.row(i)).norm();
  }
  return total;
}

double rover_cost(const RoverSpec& spec, const Matrix& trajectory) {
  const Eigen::Index last = trajectory.rows() - 1;
  const double miss_start = std::hypot(trajectory(0, 0) - spec.start_x, trajectory(0, 1) - spec.start_y);
  const double miss_goal = std::hypot(trajectory(last, 0) - spec.goal_x, trajectory(last, 1) - spec.goal_y);
  return trajectory_length(trajectory) +
         spec.endpoint_penalty * (miss_start * miss_start + miss_goal * miss_goal);
}

namespace {

ProblemSpec rover_problem_spec(const RoverSpec& rover, bool indicator_mode) {
  ProblemSpec s;
  s.name = "rover";
  s.dim = 2 * rover.num_control_points;
  s.lower = Vector::Zero(static_cast<Eigen::Index>(s.dim));
  s.upper = Vector::Ones(static_cast<Eigen::Index>(s.dim));
  s.num_constraints = rover.obstacles.size();
  s.indicator_mode = indicator_mode;
  s.known_feasible_optimum = 0.0;
  s.optimum_is_lower_bound = true;
  return s;
}

}  // namespace

RoverProblem::RoverProblem(RoverSpec spec, bool indicator_mode)
    : Problem(rover_problem_spec(spec, indicator_mode)), rover_(std::move(spec)) {
  for (const SquareObstacle& o : rover_.obstacles) {
    if (o.half_width <= 0.0 || o.cx - o.half_width < 0.0 || o.cx + o.half_width > 1.0 ||
        o.cy - o.half_width < 0.0 || o.cy + o.half_width > 1.0) {
      throw ProblemError("rover: obstacles must lie inside the unit workspace");
    }
  }
}

double RoverProblem::benchmark_value(const Vector& x) const {
  return rover_cost(rover_, rover_trajectory(rover_, x));
}

Vector RoverProblem::constraint_values(const Vector& x) const {
  const Matrix traj = rover_trajectory(rover_, x);
  Vector g(static_cast<Eigen::Index>(rover_.obstacles.size()));
  for (std::size_t i = 0; i < rover_.obstacles.size(); ++i) {
    g[static_cast<Eigen::Index>(i)] = rover_violation(traj, rover_.obstacles[i]);
  }
  return g;
}

}  // namespace cibo
