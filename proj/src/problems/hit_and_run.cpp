#include "cibo/problems/hit_and_run.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cibo {

namespace {

bool strictly_inside(const ConvexRegion& region, const Vector& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] > region.lower[i] && x[i] < region.upper[i])) return false;
  }
  for (Eigen::Index k = 0; k < region.halfspace_normals.rows(); ++k) {
    if (!(region.halfspace_normals.row(k).dot(x) < region.halfspace_offsets[k])) return false;
  }
  return !region.ball_radius_sq || x.squaredNorm() < *region.ball_radius_sq;
}

struct Chord {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/// Range of t such that x + t*d stays in the region.
Chord chord(const ConvexRegion& region, const Vector& x, const Vector& d) {
  Chord c;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (d[i] > 0) {
      c.hi = std::min(c.hi, (region.upper[i] - x[i]) / d[i]);
      c.lo = std::max(c.lo, (region.lower[i] - x[i]) / d[i]);
    } else if (d[i] < 0) {
      c.hi = std::min(c.hi, (region.lower[i] - x[i]) / d[i]);
      c.lo = std::max(c.lo, (region.upper[i] - x[i]) / d[i]);
    }
  }
  for (Eigen::Index k = 0; k < region.halfspace_normals.rows(); ++k) {
    const double ad = region.halfspace_normals.row(k).dot(d);
    const double slack = region.halfspace_offsets[k] - region.halfspace_normals.row(k).dot(x);
    if (ad > 0) {
      c.hi = std::min(c.hi, slack / ad);
    } else if (ad < 0) {
      c.lo = std::max(c.lo, slack / ad);
    }
  }
  if (region.ball_radius_sq) {
    // ||x + t d||^2 <= r^2  <=>  a t^2 + 2 b t + (|x|^2 - r^2) <= 0
    const double a = d.squaredNorm();
    const double b = x.dot(d);
    const double cc = x.squaredNorm() - *region.ball_radius_sq;
    const double disc = std::max(0.0, b * b - a * cc);
    const double root = std::sqrt(disc);
    c.lo = std::max(c.lo, (-b - root) / a);
    c.hi = std::min(c.hi, (-b + root) / a);
  }
  return c;
}

}  // namespace

std::vector<Vector> hit_and_run_feasible(RandomSource& rng, const ConvexRegion& region,
                                         std::size_t n, const HitAndRunConfig& config) {
  const Eigen::Index dim = region.lower.size();
  Vector x;
  bool found = false;
  double offset = config.start_offset;
  for (int attempt = 0; attempt < 32 && !found; ++attempt) {
    x = Vector::Constant(dim, -offset);
    found = strictly_inside(region, x);
    offset *= 0.5;
  }
  if (!found) throw ProblemError("hit_and_run_feasible: no strictly interior starting point found");

  auto step = [&] {
    for (std::size_t attempt = 0; attempt < config.max_direction_attempts; ++attempt) {
      Vector d(dim);
      for (Eigen::Index i = 0; i < dim; ++i) d[i] = rng.normal();
      const double norm = d.norm();
      if (norm == 0.0) continue;
      d /= norm;
      const Chord c = chord(region, x, d);
      if (!(c.hi > c.lo)) continue;
      const Vector candidate = x + rng.uniform(c.lo, c.hi) * d;
      // Rounding at the chord ends can leave a point an ulp outside.
      if (!region.contains(candidate)) continue;
      x = candidate;
      return;
    }
  };

  for (std::size_t i = 0; i < config.burn_in; ++i) step();
  std::vector<Vector> out;
  out.reserve(n);
  const std::size_t thin = std::max<std::size_t>(1, config.thinning);
  while (out.size() < n) {
    for (std::size_t i = 0; i < thin; ++i) step();
    out.push_back(x);
  }
  return out;
}

}  // namespace cibo
