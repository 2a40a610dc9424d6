#pragma once

#include <memory>
#include <string>

#include "cibo/problems/problem.hpp"

namespace cibo {

// Classical minimization benchmarks.
double rastrigin(const Vector& x);
/// Ackley with a = 20, b = 0.2, c = 2*pi.
double ackley(const Vector& x);
double rosenbrock(const Vector& x);

/// g1 = sum(x), g2 = ||x||^2 - 30; feasible iff both <= 0.
Vector synthetic_constraints(const Vector& x);

enum class SyntheticFunction { kRastrigin, kAckley, kRosenbrock };

/// One of the synthetic benchmarks under the two synthetic constraints.
/// Domains: Rastrigin [-5, 5]^D, Ackley and Rosenbrock [-5, 10]^D.
class SyntheticProblem : public Problem {
 public:
  SyntheticProblem(SyntheticFunction fn, std::size_t dim, bool indicator_mode);

  double benchmark_value(const Vector& x) const override;
  Vector constraint_values(const Vector& x) const override { return synthetic_constraints(x); }
  std::optional<ConvexRegion> feasible_region() const override;

 private:
  SyntheticFunction fn_;
};

}  // namespace cibo
