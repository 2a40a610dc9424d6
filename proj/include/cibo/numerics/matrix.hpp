#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cibo {

/// Dense row-major array of doubles. Rank-1 data is stored as a single row or
/// column; batches are always one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public NumericsError {
 public:
  using NumericsError::NumericsError;
};

/// Throws NumericsError naming `what` if any entry is NaN or infinite.
template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& values, const std::string& what) {
  if (!values.derived().allFinite()) {
    throw NumericsError("non-finite value in " + what);
  }
}

inline std::string shape_string(const Matrix& m) {
  return "(" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")";
}

}  // namespace cibo
