#include "cibo/numerics/autodiff.hpp"

#include <cmath>
#include <numbers>

namespace cibo {

namespace {

void require_same_tape(Var a, Var b, const char* op) {
  if (a.tape() == nullptr || a.tape() != b.tape()) {
    throw NumericsError(std::string(op) + ": operands belong to different tapes");
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " +
                     shape_string(b));
  }
}

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

}  // namespace

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_derivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
  const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
  return cdf + x * pdf;
}

const Matrix& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& param) {
  Node n;
  n.value = param.value;
  n.requires_grad = true;
  n.param = &param;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, bool requires_grad, Backprop backprop) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

void Tape::accumulate(std::size_t id, const Matrix& delta) { accumulate_expr(id, delta); }

void Tape::backward(Var root) {
  if (root.tape() != this) throw NumericsError("backward: root is not on this tape");
  Node& r = nodes_[root.id()];
  if (r.value.rows() != 1 || r.value.cols() != 1) {
    throw ShapeError("backward: loss must be a scalar, got " + shape_string(r.value));
  }
  if (!r.requires_grad) return;  // loss does not depend on any parameter
  ensure_grad(r);
  r.grad(0, 0) = 1.0;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.grad_ready) continue;
    if (n.backprop) n.backprop(*this, i);
  }
  for (Node& n : nodes_) {
    if (n.param == nullptr || !n.grad_ready) continue;
    if (!n.grad.allFinite()) {
      throw NumericsError("non-finite gradient for parameter '" + n.param->name + "'");
    }
    n.param->grad += n.grad;
  }
}

namespace ad {

Var matmul(Var a, Var b) {
  require_same_tape(a, b, "matmul");
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ " + shape_string(a.value()) + " * " +
                     shape_string(b.value()));
  }
  Tape& t = *a.tape();
  const bool rg = t.requires_grad(a.id()) || t.requires_grad(b.id());
  Matrix out = a.value() * b.value();
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), rg, [ia, ib](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    if (tp.requires_grad(ia)) tp.accumulate_expr(ia, g * tp.value(ib).transpose());
    if (tp.requires_grad(ib)) tp.accumulate_expr(ib, tp.value(ia).transpose() * g);
  });
}

Var add(Var a, Var b) {
  require_same_tape(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  Tape& t = *a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(a.value() + b.value(), t.requires_grad(ia) || t.requires_grad(ib),
                  [ia, ib](Tape& tp, std::size_t self) {
                    tp.accumulate(ia, tp.grad(self));
                    tp.accumulate(ib, tp.grad(self));
                  });
}

Var sub(Var a, Var b) {
  require_same_tape(a, b, "sub");
  require_same_shape(a.value(), b.value(), "sub");
  Tape& t = *a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(a.value() - b.value(), t.requires_grad(ia) || t.requires_grad(ib),
                  [ia, ib](Tape& tp, std::size_t self) {
                    tp.accumulate(ia, tp.grad(self));
                    tp.accumulate_expr(ib, -tp.grad(self));
                  });
}

Var mul(Var a, Var b) {
  require_same_tape(a, b, "mul");
  require_same_shape(a.value(), b.value(), "mul");
  Tape& t = *a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  Matrix out = a.value().cwiseProduct(b.value());
  return t.record(std::move(out), t.requires_grad(ia) || t.requires_grad(ib),
                  [ia, ib](Tape& tp, std::size_t self) {
                    const Matrix& g = tp.grad(self);
                    if (tp.requires_grad(ia)) tp.accumulate_expr(ia, g.cwiseProduct(tp.value(ib)));
                    if (tp.requires_grad(ib)) tp.accumulate_expr(ib, g.cwiseProduct(tp.value(ia)));
                  });
}

Var scale(Var a, double factor) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  return t.record(a.value() * factor, t.requires_grad(ia),
                  [ia, factor](Tape& tp, std::size_t self) {
                    tp.accumulate_expr(ia, tp.grad(self) * factor);
                  });
}

Var add_constant(Var a, double offset) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  Matrix out = a.value().array() + offset;
  return t.record(std::move(out), t.requires_grad(ia), [ia](Tape& tp, std::size_t self) {
    tp.accumulate(ia, tp.grad(self));
  });
}

Var add_row(Var x, Var bias) {
  require_same_tape(x, bias, "add_row");
  if (bias.rows() != 1 || bias.cols() != x.cols()) {
    throw ShapeError("add_row: bias " + shape_string(bias.value()) + " does not match " +
                     shape_string(x.value()));
  }
  Tape& t = *x.tape();
  const std::size_t ix = x.id(), ib = bias.id();
  Matrix out = x.value().rowwise() + bias.value().row(0);
  return t.record(std::move(out), t.requires_grad(ix) || t.requires_grad(ib),
                  [ix, ib](Tape& tp, std::size_t self) {
                    const Matrix& g = tp.grad(self);
                    tp.accumulate(ix, g);
                    if (tp.requires_grad(ib)) tp.accumulate_expr(ib, g.colwise().sum());
                  });
}

Var add_scalar(Var x, Var s) {
  require_same_tape(x, s, "add_scalar");
  if (s.rows() != 1 || s.cols() != 1) throw ShapeError("add_scalar: offset must be 1x1");
  Tape& t = *x.tape();
  const std::size_t ix = x.id(), is = s.id();
  Matrix out = x.value().array() + s.value()(0, 0);
  return t.record(std::move(out), t.requires_grad(ix) || t.requires_grad(is),
                  [ix, is](Tape& tp, std::size_t self) {
                    const Matrix& g = tp.grad(self);
                    tp.accumulate(ix, g);
                    if (tp.requires_grad(is)) {
                      Matrix total(1, 1);
                      total(0, 0) = g.sum();
                      tp.accumulate(is, total);
                    }
                  });
}

Var square(Var a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  Matrix out = a.value().array().square();
  return t.record(std::move(out), t.requires_grad(ia), [ia](Tape& tp, std::size_t self) {
    tp.accumulate_expr(ia, 2.0 * tp.grad(self).cwiseProduct(tp.value(ia)));
  });
}

Var exp(Var a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  Matrix out = a.value().array().exp();
  return t.record(std::move(out), t.requires_grad(ia), [ia](Tape& tp, std::size_t self) {
    tp.accumulate_expr(ia, tp.grad(self).cwiseProduct(tp.value(self)));
  });
}

Var gelu(Var a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  Matrix out = a.value().unaryExpr([](double v) { return cibo::gelu(v); });
  return t.record(std::move(out), t.requires_grad(ia), [ia](Tape& tp, std::size_t self) {
    tp.accumulate_expr(ia, tp.grad(self).cwiseProduct(tp.value(ia).unaryExpr(
                               [](double v) { return gelu_derivative(v); })));
  });
}

Var row_sum(Var a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  Matrix out = a.value().rowwise().sum();
  return t.record(std::move(out), t.requires_grad(ia), [ia](Tape& tp, std::size_t self) {
    const Eigen::Index cols = tp.value(ia).cols();
    tp.accumulate_expr(ia, tp.grad(self).replicate(1, cols));
  });
}

Var col_sum(Var a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  Matrix out = a.value().colwise().sum();
  return t.record(std::move(out), t.requires_grad(ia), [ia](Tape& tp, std::size_t self) {
    const Eigen::Index rows = tp.value(ia).rows();
    tp.accumulate_expr(ia, tp.grad(self).replicate(rows, 1));
  });
}

Var sum(Var a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return t.record(std::move(out), t.requires_grad(ia), [ia](Tape& tp, std::size_t self) {
    const Matrix& v = tp.value(ia);
    tp.accumulate_expr(ia, Matrix::Constant(v.rows(), v.cols(), tp.grad(self)(0, 0)));
  });
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  if (n == 0) throw ShapeError("mean of an empty array");
  return scale(sum(a), 1.0 / n);
}

Var reshape(Var a, Eigen::Index rows, Eigen::Index cols) {
  if (rows * cols != a.value().size()) {
    throw ShapeError("reshape: cannot view " + shape_string(a.value()) + " as (" +
                     std::to_string(rows) + "x" + std::to_string(cols) + ")");
  }
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  Matrix out = Eigen::Map<const Matrix>(a.value().data(), rows, cols);
  return t.record(std::move(out), t.requires_grad(ia), [ia](Tape& tp, std::size_t self) {
    const Matrix& src = tp.value(ia);
    const Matrix& g = tp.grad(self);
    tp.accumulate_expr(ia, Eigen::Map<const Matrix>(g.data(), src.rows(), src.cols()));
  });
}

Var gather_rows(Var a, std::vector<Eigen::Index> index) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  const Matrix& src = a.value();
  Matrix out(static_cast<Eigen::Index>(index.size()), src.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= src.rows()) throw ShapeError("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(i)) = src.row(index[i]);
  }
  return t.record(std::move(out), t.requires_grad(ia),
                  [ia, idx = std::move(index)](Tape& tp, std::size_t self) {
                    const Matrix& g = tp.grad(self);
                    Matrix delta = Matrix::Zero(tp.value(ia).rows(), tp.value(ia).cols());
                    for (std::size_t i = 0; i < idx.size(); ++i) {
                      delta.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
                    }
                    tp.accumulate(ia, delta);
                  });
}

}  // namespace ad
}  // namespace cibo
