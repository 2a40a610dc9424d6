#include "cibo/flow_prior/flow_prior.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cibo/numerics/adam.hpp"

namespace cibo {

double fm_loss(const VelocityField& field, const Matrix& x, std::span<const double> weights,
               RandomSource& rng, std::size_t draws_per_record) {
  if (x.rows() == 0) throw std::invalid_argument("fm_loss: empty dataset");
  if (static_cast<Eigen::Index>(weights.size()) != x.rows()) throw ShapeError("fm_loss: weights/records mismatch");
  if (draws_per_record == 0) throw std::invalid_argument("fm_loss: draws_per_record must be >= 1");

  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (weights[static_cast<std::size_t>(i)] > 0.0) rows.push_back(i);
  }
  if (rows.empty()) return 0.0;

  const Eigen::Index d = x.cols();
  const auto n = static_cast<Eigen::Index>(rows.size() * draws_per_record);
  Matrix xt(n, d), t(n, 1), target(n, d);
  Vector w(n);
  Eigen::Index k = 0;
  for (Eigen::Index i : rows) {
    for (std::size_t s = 0; s < draws_per_record; ++s, ++k) {
      const Matrix x0 = rng.standard_normal(1, d);
      const double tk = rng.uniform();
      xt.row(k) = (1.0 - tk) * x0 + tk * x.row(i);
      t(k, 0) = tk;
      target.row(k) = x.row(i) - x0;
      w[k] = weights[static_cast<std::size_t>(i)] / static_cast<double>(draws_per_record);
    }
  }
  const Matrix v = field(xt, t);
  return w.dot((v - target).rowwise().squaredNorm());
}

Matrix integrate_rk4(const VelocityField& field, const Matrix& z, std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("integrate_rk4: steps must be >= 1");
  const double h = 1.0 / static_cast<double>(steps);
  Matrix x = z;
  Matrix t(z.rows(), 1);
  for (std::size_t s = 0; s < steps; ++s) {
    const double t0 = static_cast<double>(s) * h;
    t.setConstant(t0);
    const Matrix k1 = field(x, t);
    t.setConstant(t0 + 0.5 * h);
    const Matrix k2 = field(x + (0.5 * h) * k1, t);
    const Matrix k3 = field(x + (0.5 * h) * k2, t);
    t.setConstant(t0 + h);
    const Matrix k4 = field(x + h * k3, t);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

void FlowConfig::validate() const {
  if (hidden_layers == 0 || hidden_units == 0) throw std::invalid_argument("flow network must have hidden units");
  if (epochs == 0 || batch_size == 0) throw std::invalid_argument("flow epochs and batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw std::invalid_argument("flow learning_rate must be > 0");
  if (integration_steps == 0) throw std::invalid_argument("flow integration_steps must be >= 1");
}

namespace {

MlpNet make_velocity_net(std::size_t dim, const FlowConfig& config, const RandomSource& init_rng) {
  config.validate();
  if (dim == 0) throw std::invalid_argument("flow prior dimension must be >= 1");
  RandomSource rng = init_rng;
  MlpNet net(MlpShape{dim + 1, config.hidden_layers, config.hidden_units, dim}.widths(), rng);
  net.zero_output_layer();
  return net;
}

Matrix with_time(const Matrix& x, const Matrix& t) {
  Matrix in(x.rows(), x.cols() + 1);
  in.leftCols(x.cols()) = x;
  in.col(x.cols()) = t.col(0);
  return in;
}

}  // namespace

FlowPrior::FlowPrior(std::size_t dim, FlowConfig config, const RandomSource& init_rng)
    : dim_(dim), config_(config), net_(make_velocity_net(dim, config, init_rng)) {}

Matrix FlowPrior::velocity(const Matrix& x, const Matrix& t) const {
  if (x.cols() != static_cast<Eigen::Index>(dim_) || t.rows() != x.rows() || t.cols() != 1) {
    throw ShapeError("flow velocity: got x " + shape_string(x) + ", t " + shape_string(t));
  }
  return net_.forward(with_time(x, t));
}

VelocityField FlowPrior::field() const {
  return [this](const Matrix& x, const Matrix& t) { return velocity(x, t); };
}

std::vector<double> FlowPrior::train(const Matrix& x, std::span<const double> weights, RandomSource& rng) {
  if (x.rows() == 0) throw std::invalid_argument("train_prior: empty dataset");
  if (x.cols() != static_cast<Eigen::Index>(dim_)) throw ShapeError("train_prior: got " + shape_string(x));
  if (static_cast<Eigen::Index>(weights.size()) != x.rows()) throw ShapeError("train_prior: weights/records mismatch");
  require_finite(x, "train_prior inputs");

  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double w = weights[static_cast<std::size_t>(i)];
    if (w < 0.0 || !std::isfinite(w)) throw std::invalid_argument("train_prior: weights must be finite and >= 0");
    if (w > 0.0) rows.push_back(i);
  }
  if (rows.empty()) throw std::invalid_argument("train_prior: all weights are zero");

  const std::size_t n = rows.size();
  const auto d = static_cast<Eigen::Index>(dim_);
  AdamConfig ac;
  ac.learning_rate = config_.learning_rate;
  Adam opt(net_.parameters(), ac);
  std::vector<double> history;
  history.reserve(config_.epochs);
  for (std::size_t epoch = 0; epoch < config_.epochs; ++epoch) {
    const std::vector<std::size_t> order = rng.permutation(n);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += config_.batch_size) {
      const auto b = static_cast<Eigen::Index>(std::min(n, start + config_.batch_size) - start);
      Matrix xb(b, d), mult(b, 1);
      for (Eigen::Index i = 0; i < b; ++i) {
        const Eigen::Index src = rows[order[start + static_cast<std::size_t>(i)]];
        xb.row(i) = x.row(src);
        mult(i, 0) = static_cast<double>(n) * weights[static_cast<std::size_t>(src)];
      }
      const Matrix x0 = rng.standard_normal(b, d);
      Matrix t(b, 1);
      for (Eigen::Index i = 0; i < b; ++i) t(i, 0) = rng.uniform();
      const Matrix xt = (x0.array().colwise() * (1.0 - t.col(0).array())).matrix() +
                        (xb.array().colwise() * t.col(0).array()).matrix();

      Tape tape;
      Var v = net_.forward(tape, tape.constant(with_time(xt, t)));
      Var sq = ad::row_sum(ad::square(ad::sub(v, tape.constant(xb - x0))));
      Var loss = ad::mean(ad::mul(sq, tape.constant(std::move(mult))));
      const double value = loss.value()(0, 0);
      if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << "flow prior: non-finite training loss at epoch " << epoch + 1;
        throw NumericsError(msg.str());
      }
      opt.zero_grad();
      tape.backward(loss);
      opt.step();
      total += value;
      ++batches;
    }
    history.push_back(total / static_cast<double>(batches));
  }
  return history;
}

Matrix FlowPrior::push_forward(const Matrix& z) const {
  if (z.cols() != static_cast<Eigen::Index>(dim_)) throw ShapeError("push_forward: got " + shape_string(z));
  require_finite(z, "push_forward latents");
  Matrix x = integrate_rk4(field(), z, config_.integration_steps);
  if (!x.allFinite()) throw NumericsError("push_forward: flow trajectory became non-finite");
  return x;
}

Matrix FlowPrior::sample(RandomSource& rng, std::size_t n) const {
  return push_forward(rng.standard_normal(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim_)));
}

Matrix sample_prior(const FlowPrior& prior, const BoxScaler& scaler, RandomSource& rng, std::size_t n) {
  return scaler.to_domain(prior.sample(rng, n));
}

}  // namespace cibo
