#include "cibo/numerics/adam.hpp"

#include <cmath>

namespace cibo {

Adam::Adam(std::vector<Parameter*> params, AdamConfig config) : config_(config) {
  for (Parameter* p : params) add(*p);
}

void Adam::add(Parameter& param, std::optional<double> learning_rate) {
  const auto r = param.value.rows(), c = param.value.cols();
  if (param.grad.rows() != r || param.grad.cols() != c) param.zero_grad();
  slots_.push_back(Slot{&param, learning_rate.value_or(config_.learning_rate), Matrix::Zero(r, c),
                        Matrix::Zero(r, c)});
}

void Adam::step() {
  for (const Slot& s : slots_) {
    if (s.param->grad.rows() != s.m.rows() || s.param->grad.cols() != s.m.cols()) {
      throw ShapeError("Adam: gradient shape does not match parameter '" + s.param->name + "'");
    }
    if (!s.param->grad.allFinite()) {
      throw NumericsError("Adam: non-finite gradient for parameter '" + s.param->name + "'");
    }
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const double bias1 = 1.0 - std::pow(config_.beta1, t);
  const double bias2 = 1.0 - std::pow(config_.beta2, t);
  for (Slot& s : slots_) {
    const Matrix& g = s.param->grad;
    s.m = config_.beta1 * s.m + (1.0 - config_.beta1) * g;
    s.v = config_.beta2 * s.v + (1.0 - config_.beta2) * g.cwiseProduct(g);
    const double lr = s.learning_rate;
    const double eps = config_.epsilon;
    s.param->value.array() -=
        lr * (s.m.array() / bias1) / ((s.v.array() / bias2).sqrt() + eps);
  }
}

void Adam::zero_grad() {
  for (Slot& s : slots_) s.param->zero_grad();
}

}  // namespace cibo
