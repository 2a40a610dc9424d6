#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "cibo/numerics/matrix.hpp"

namespace cibo {

/// A trainable array with its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

class Tape;

/// Handle to a node on a Tape. Cheap to copy; only valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode differentiation over whole-array operations.
///
/// Nodes are appended in evaluation order, so a reverse sweep over the node
/// list is a valid topological order. Parameters are leaves whose gradients are
/// accumulated into Parameter::grad on backward().
class Tape {
 public:
  using Backprop = std::function<void(Tape&, std::size_t self)>;

  Var constant(Matrix value);
  Var parameter(Parameter& param);

  /// Appends an interior node. `backprop` reads grad(self) and accumulates into
  /// its inputs via accumulate().
  Var record(Matrix value, bool requires_grad, Backprop backprop);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  const Matrix& grad(std::size_t id) const { return nodes_[id].grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  void accumulate(std::size_t id, const Matrix& delta);
  template <typename Expr>
  void accumulate_expr(std::size_t id, const Expr& delta) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    ensure_grad(n);
    n.grad += delta;
  }

  /// Propagates d(root)/d(node) for a scalar (1x1) root. Throws NumericsError
  /// naming the parameter if any parameter gradient is non-finite.
  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool grad_ready = false;
    Parameter* param = nullptr;
    Backprop backprop;
  };

  static void ensure_grad(Node& n) {
    if (!n.grad_ready) {
      n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
      n.grad_ready = true;
    }
  }

  std::vector<Node> nodes_;
};

namespace ad {

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var add_constant(Var a, double offset);
/// x (n x m) + bias (1 x m) broadcast over rows.
Var add_row(Var x, Var bias);
/// x + s for a 1x1 node s, broadcast everywhere.
Var add_scalar(Var x, Var s);
Var square(Var a);
Var exp(Var a);
Var gelu(Var a);
/// n x m -> n x 1.
Var row_sum(Var a);
/// n x m -> 1 x m.
Var col_sum(Var a);
/// Any shape -> 1 x 1.
Var sum(Var a);
Var mean(Var a);
/// Row-major reinterpretation; rows * cols must match.
Var reshape(Var a, Eigen::Index rows, Eigen::Index cols);
/// out.row(i) = a.row(index[i]); gradient is scatter-added.
Var gather_rows(Var a, std::vector<Eigen::Index> index);

}  // namespace ad

/// Exact GELU: x * Phi(x) with Phi the standard normal CDF (via erf).
double gelu(double x);
/// d/dx gelu(x) = Phi(x) + x * phi(x).
double gelu_derivative(double x);

}  // namespace cibo
