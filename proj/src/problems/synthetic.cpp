#include "cibo/problems/synthetic.hpp"

#include <cmath>
#include <numbers>

namespace cibo {

double rastrigin(const Vector& x) {
  const double two_pi = 2.0 * std::numbers::pi;
  double total = 10.0 * static_cast<double>(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) total += x[i] * x[i] - 10.0 * std::cos(two_pi * x[i]);
  return total;
}

double ackley(const Vector& x) {
  constexpr double a = 20.0, b = 0.2;
  const double c = 2.0 * std::numbers::pi;
  const double n = static_cast<double>(x.size());
  const double mean_sq = x.squaredNorm() / n;
  const double mean_cos = x.unaryExpr([c](double v) { return std::cos(c * v); }).sum() / n;
  return -a * std::exp(-b * std::sqrt(mean_sq)) - std::exp(mean_cos) + a + std::numbers::e;
}

double rosenbrock(const Vector& x) {
  double total = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    const double b = 1.0 - x[i];
    total += 100.0 * a * a + b * b;
  }
  return total;
}

Vector synthetic_constraints(const Vector& x) {
  Vector g(2);
  g[0] = x.sum();
  g[1] = x.squaredNorm() - 30.0;
  return g;
}

namespace {

ProblemSpec make_spec(SyntheticFunction fn, std::size_t dim, bool indicator_mode) {
  ProblemSpec s;
  s.dim = dim;
  s.num_constraints = 2;
  s.indicator_mode = indicator_mode;
  double lo = -5.0, hi = 10.0;
  switch (fn) {
    case SyntheticFunction::kRastrigin:
      s.name = "rastrigin";
      hi = 5.0;
      s.known_feasible_optimum = 0.0;  // origin is feasible
      break;
    case SyntheticFunction::kAckley:
      s.name = "ackley";
      s.known_feasible_optimum = 0.0;
      break;
    case SyntheticFunction::kRosenbrock:
      s.name = "rosenbrock";
      // The unconstrained minimizer (1, ..., 1) violates sum(x) <= 0.
      s.known_feasible_optimum = 0.0;
      s.optimum_is_lower_bound = true;
      break;
  }
  const auto d = static_cast<Eigen::Index>(dim);
  s.lower = Vector::Constant(d, lo);
  s.upper = Vector::Constant(d, hi);
  return s;
}

}  // namespace

SyntheticProblem::SyntheticProblem(SyntheticFunction fn, std::size_t dim, bool indicator_mode)
    : Problem(make_spec(fn, dim, indicator_mode)), fn_(fn) {}

double SyntheticProblem::benchmark_value(const Vector& x) const {
  switch (fn_) {
    case SyntheticFunction::kRastrigin:
      return rastrigin(x);
    case SyntheticFunction::kAckley:
      return ackley(x);
    case SyntheticFunction::kRosenbrock:
      return rosenbrock(x);
  }
  return 0.0;
}

std::optional<ConvexRegion> SyntheticProblem::feasible_region() const {
  ConvexRegion r;
  r.lower = spec().lower;
  r.upper = spec().upper;
  r.halfspace_normals = Matrix::Ones(1, static_cast<Eigen::Index>(spec().dim));
  r.halfspace_offsets = Vector::Zero(1);
  r.ball_radius_sq = 30.0;
  return r;
}

}  // namespace cibo
