#include "cibo/numerics/mlp.hpp"

#include <cmath>

namespace cibo {

std::vector<std::size_t> MlpShape::widths() const {
  std::vector<std::size_t> w;
  w.push_back(input);
  for (std::size_t i = 0; i < hidden_layers; ++i) w.push_back(hidden_units);
  w.push_back(output);
  return w;
}

namespace {

void validate_widths(const std::vector<std::size_t>& widths) {
  if (widths.size() < 2) throw ShapeError("MlpNet needs at least an input and an output width");
  for (const std::size_t w : widths) {
    if (w == 0) throw ShapeError("MlpNet layer widths must be positive");
  }
}

}  // namespace

MlpNet::MlpNet(std::vector<std::size_t> widths, RandomSource& rng) : widths_(std::move(widths)) {
  validate_widths(widths_);
  for (std::size_t i = 0; i + 1 < widths_.size(); ++i) {
    const auto fan_in = static_cast<Eigen::Index>(widths_[i]);
    const auto fan_out = static_cast<Eigen::Index>(widths_[i + 1]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    weights_.emplace_back("W" + std::to_string(i), rng.uniform_matrix(fan_in, fan_out, -bound, bound));
    biases_.emplace_back("b" + std::to_string(i), rng.uniform_matrix(1, fan_out, -bound, bound));
  }
}

MlpNet MlpNet::zeros(std::vector<std::size_t> widths) {
  validate_widths(widths);
  MlpNet net;
  net.widths_ = std::move(widths);
  for (std::size_t i = 0; i + 1 < net.widths_.size(); ++i) {
    const auto fan_in = static_cast<Eigen::Index>(net.widths_[i]);
    const auto fan_out = static_cast<Eigen::Index>(net.widths_[i + 1]);
    net.weights_.emplace_back("W" + std::to_string(i), Matrix::Zero(fan_in, fan_out));
    net.biases_.emplace_back("b" + std::to_string(i), Matrix::Zero(1, fan_out));
  }
  return net;
}

std::size_t MlpNet::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < widths_.size(); ++i) n += widths_[i] * widths_[i + 1] + widths_[i + 1];
  return n;
}

void MlpNet::zero_output_layer() {
  weights_.back().value.setZero();
  biases_.back().value.setZero();
}

void MlpNet::check_input(const Matrix& batch) const {
  if (static_cast<std::size_t>(batch.cols()) != input_dim()) {
    throw ShapeError("MlpNet input has " + std::to_string(batch.cols()) + " columns, expected " +
                     std::to_string(input_dim()));
  }
  require_finite(batch, "MlpNet input");
}

Matrix MlpNet::forward(const Matrix& batch) const {
  check_input(batch);
  Matrix h = batch;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    Matrix next = h * weights_[i].value;
    next.rowwise() += biases_[i].value.row(0);
    if (i + 1 < weights_.size()) next = next.unaryExpr([](double v) { return gelu(v); });
    h = std::move(next);
  }
  return h;
}

Var MlpNet::forward(Tape& tape, Var batch) {
  check_input(batch.value());
  Var h = batch;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    h = ad::add_row(ad::matmul(h, tape.parameter(weights_[i])), tape.parameter(biases_[i]));
    if (i + 1 < weights_.size()) h = ad::gelu(h);
  }
  return h;
}

std::vector<Parameter*> MlpNet::parameters() {
  std::vector<Parameter*> out;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    out.push_back(&weights_[i]);
    out.push_back(&biases_[i]);
  }
  return out;
}

void MlpNet::zero_grad() {
  for (Parameter* p : parameters()) p->zero_grad();
}

}  // namespace cibo
