#include "cibo/problems/problem.hpp"

namespace cibo {

void ProblemSpec::validate() const {
  if (dim == 0) throw ProblemError(name + ": dimension must be positive");
  if (static_cast<std::size_t>(lower.size()) != dim || static_cast<std::size_t>(upper.size()) != dim) {
    throw ProblemError(name + ": bounds must have length " + std::to_string(dim));
  }
  for (std::size_t i = 0; i < dim; ++i) {
    if (!(lower[static_cast<Eigen::Index>(i)] < upper[static_cast<Eigen::Index>(i)])) {
      throw ProblemError(name + ": lower bound must be below upper bound in coordinate " +
                         std::to_string(i));
    }
  }
}

bool is_feasible(const EvalRecord& record) {
  return record.c.size() == 0 || record.c.maxCoeff() <= 0.0;
}

Vector to_indicator(const Vector& c) {
  return c.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

bool ConvexRegion::contains(const Vector& x, double slack) const {
  if (x.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < lower[i] - slack || x[i] > upper[i] + slack) return false;
  }
  for (Eigen::Index k = 0; k < halfspace_normals.rows(); ++k) {
    if (halfspace_normals.row(k).dot(x) > halfspace_offsets[k] + slack) return false;
  }
  if (ball_radius_sq && x.squaredNorm() > *ball_radius_sq + slack) return false;
  return true;
}

Problem::Problem(ProblemSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

void Problem::check_input(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != spec_.dim) {
    throw ProblemError(spec_.name + ": expected input of length " + std::to_string(spec_.dim) +
                       ", got " + std::to_string(x.size()));
  }
  if (!x.allFinite()) throw ProblemError(spec_.name + ": non-finite input");
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < spec_.lower[i] || x[i] > spec_.upper[i]) {
      throw ProblemError(spec_.name + ": coordinate " + std::to_string(i) + " = " +
                         std::to_string(x[i]) + " is outside the search box");
    }
  }
}

EvalRecord Problem::evaluate(const Vector& x) const {
  check_input(x);
  EvalRecord r;
  r.x = x;
  r.y = -benchmark_value(x);
  const Vector g = constraint_values(x);
  r.c = spec_.indicator_mode ? to_indicator(g) : g;
  if (!std::isfinite(r.y) || !r.c.allFinite()) {
    throw ProblemError(spec_.name + ": evaluation produced a non-finite value");
  }
  return r;
}

CountingProblem::CountingProblem(std::shared_ptr<const Problem> inner)
    : Problem(inner->spec()), inner_(std::move(inner)) {}

EvalRecord CountingProblem::evaluate(const Vector& x) const {
  ++count_;
  return inner_->evaluate(x);
}

BoxScaler::BoxScaler(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) throw ProblemError("BoxScaler: bound lengths differ");
}

Matrix BoxScaler::to_model(const Matrix& x) const {
  const Eigen::RowVectorXd lo = lower_.transpose();
  const Eigen::RowVectorXd span = (upper_ - lower_).transpose();
  Matrix u = x.rowwise() - lo;
  u.array().rowwise() /= span.array();
  return (2.0 * u).array() - 1.0;
}

Matrix BoxScaler::to_domain(const Matrix& u) const {
  const Eigen::RowVectorXd lo = lower_.transpose();
  const Eigen::RowVectorXd span = (upper_ - lower_).transpose();
  Matrix x = (u.array() + 1.0) * 0.5;
  x.array().rowwise() *= span.array();
  return x.rowwise() + lo;
}

Matrix BoxScaler::clamp_domain(const Matrix& x) const {
  Matrix out = x;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      out(r, c) = std::clamp(out(r, c), lower_[c], upper_[c]);
    }
  }
  return out;
}

}  // namespace cibo
