#pragma once

#include <cstddef>
#include <vector>

#include "cibo/numerics/random.hpp"
#include "cibo/problems/problem.hpp"

namespace cibo {

struct HitAndRunConfig {
  /// The walk starts at -start_offset * (1, ..., 1), which must be strictly
  /// interior. For the synthetic constraints the origin itself sits on the
  /// sum(x) <= 0 boundary.
  double start_offset = 0.01;
  std::size_t burn_in = 100;
  std::size_t thinning = 10;
  /// Attempts to find a direction with a non-degenerate chord per step.
  std::size_t max_direction_attempts = 100;
};

/// Uniform sampling from a convex region by hit-and-run: pick a uniformly random
/// direction, intersect the line with the region, jump to a uniform point on
/// the chord. Returns exactly n points, all inside the region.
std::vector<Vector> hit_and_run_feasible(RandomSource& rng, const ConvexRegion& region,
                                         std::size_t n, const HitAndRunConfig& config = {});

}  // namespace cibo
