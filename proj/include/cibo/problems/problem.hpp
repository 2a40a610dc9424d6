#pragma once

#include <atomic>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cibo/numerics/matrix.hpp"

namespace cibo {

class ProblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemSpec {
  std::string name;
  std::size_t dim = 0;
  Vector lower;
  Vector upper;
  std::size_t num_constraints = 0;
  /// Constraint feedback is h = 1[g > 0] instead of g.
  bool indicator_mode = false;
  /// Benchmark value (minimization units) of the best feasible point, if known.
  std::optional<double> known_feasible_optimum;
  /// True when known_feasible_optimum is only a lower bound.
  bool optimum_is_lower_bound = false;

  void validate() const;
};

/// One evaluated design. `y` is the maximization objective (the negated
/// benchmark value); `c` holds g(x) or, in indicator mode, 1[g(x) > 0].
struct EvalRecord {
  Vector x;
  double y = 0.0;
  Vector c;

  double benchmark_value() const { return -y; }
};

/// A record is feasible when every constraint entry is <= 0. This reads the
/// same in both feedback modes because indicators are 0 for feasible.
bool is_feasible(const EvalRecord& record);

/// h_m = 1 iff c_m > 0 (strict, so the boundary counts as feasible).
Vector to_indicator(const Vector& c);

/// Convex region {x : lower <= x <= upper, A x <= b, ||x||^2 <= radius_sq}.
struct ConvexRegion {
  Vector lower;
  Vector upper;
  Matrix halfspace_normals;  // one row per halfspace
  Vector halfspace_offsets;
  std::optional<double> ball_radius_sq;

  bool contains(const Vector& x, double slack = 0.0) const;
};

class Problem {
 public:
  virtual ~Problem() = default;

  const ProblemSpec& spec() const { return spec_; }

  /// Raw benchmark value to be minimized.
  virtual double benchmark_value(const Vector& x) const = 0;
  /// Raw constraint values g(x); feasible iff every entry <= 0.
  virtual Vector constraint_values(const Vector& x) const = 0;

  /// Validates x (length, finite, inside the box; out-of-box points are
  /// rejected, not clamped) and returns the record in optimizer conventions.
  virtual EvalRecord evaluate(const Vector& x) const;

  /// Region used for feasible initialization, when the constraints are known
  /// to be convex and explicit.
  virtual std::optional<ConvexRegion> feasible_region() const { return std::nullopt; }

 protected:
  explicit Problem(ProblemSpec spec);
  void check_input(const Vector& x) const;

 private:
  ProblemSpec spec_;
};

/// Forwards to another problem and counts evaluate() calls.
class CountingProblem : public Problem {
 public:
  explicit CountingProblem(std::shared_ptr<const Problem> inner);

  double benchmark_value(const Vector& x) const override { return inner_->benchmark_value(x); }
  Vector constraint_values(const Vector& x) const override { return inner_->constraint_values(x); }
  EvalRecord evaluate(const Vector& x) const override;
  std::optional<ConvexRegion> feasible_region() const override { return inner_->feasible_region(); }

  std::size_t evaluations() const { return count_.load(); }

 private:
  std::shared_ptr<const Problem> inner_;
  mutable std::atomic<std::size_t> count_{0};
};

/// Affine map between the search box and the model space [-1, 1]^D.
class BoxScaler {
 public:
  BoxScaler() = default;
  BoxScaler(Vector lower, Vector upper);

  /// Row-wise maps over batches (one point per row).
  Matrix to_model(const Matrix& x) const;
  Matrix to_domain(const Matrix& u) const;
  Matrix clamp_domain(const Matrix& x) const;

  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

 private:
  Vector lower_;
  Vector upper_;
};

}  // namespace cibo
