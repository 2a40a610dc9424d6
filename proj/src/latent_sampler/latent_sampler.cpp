#include "cibo/latent_sampler/latent_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cibo/flow_prior/flow_prior.hpp"

namespace cibo {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

Matrix with_time(const Matrix& z, double t) {
  Matrix in(z.rows(), z.cols() + 1);
  in.leftCols(z.cols()) = z;
  in.col(z.cols()).setConstant(t);
  return in;
}

}  // namespace

Vector standard_normal_log_density(const Matrix& z) {
  return (-0.5 * z.rowwise().squaredNorm()).array() - 0.5 * static_cast<double>(z.cols()) * kLog2Pi;
}

TargetLogDensity::TargetLogDensity(const FlowPrior& prior, const BoxScaler& scaler, RewardFn reward, double beta)
    : prior_(prior), scaler_(scaler), reward_(std::move(reward)), beta_(beta) {}

Matrix TargetLogDensity::decode(const Matrix& z) const {
  return scaler_.clamp_domain(scaler_.to_domain(prior_.push_forward(z)));
}

Vector TargetLogDensity::log_reward(const Matrix& z, const Matrix& x) const {
  Vector out = standard_normal_log_density(z);
  if (beta_ != 0.0) out += beta_ * reward_(x);
  if (!out.allFinite()) throw NumericsError("log_reward: non-finite value");
  return out;
}

Vector TargetLogDensity::operator()(const Matrix& z) const { return log_reward(z, decode(z)); }

void SamplerConfig::validate() const {
  if (hidden_layers == 0 || hidden_units == 0) throw std::invalid_argument("sampler network must have hidden units");
  if (num_steps == 0) throw std::invalid_argument("sampler num_steps must be >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sampler sigma must be > 0");
  if (batch_size == 0) throw std::invalid_argument("sampler batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !(log_z_learning_rate > 0.0)) {
    throw std::invalid_argument("sampler learning rates must be > 0");
  }
  if (buffer_factor == 0) throw std::invalid_argument("sampler buffer_factor must be >= 1");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be >= 1");
}

void ReplayBuffer::add(const Matrix& z, const Vector& log_reward) {
  if (z.rows() != log_reward.size()) throw ShapeError("replay buffer: latents and rewards disagree");
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double e = -log_reward[i];
    if (!std::isfinite(e)) throw NumericsError("replay buffer: non-finite energy");
    // Insert after entries of equal energy so older entries keep their rank.
    auto pos = std::upper_bound(entries_.begin(), entries_.end(), e,
                                [](double v, const Entry& en) { return v < en.energy; });
    entries_.insert(pos, Entry{z.row(i).transpose(), e});
  }
  if (entries_.size() > capacity_) entries_.resize(capacity_);
}

std::vector<std::size_t> ReplayBuffer::sample_ranks(RandomSource& rng, std::size_t n) const {
  if (entries_.empty()) throw std::logic_error("replay buffer is empty");
  std::vector<double> cumulative(entries_.size());
  double total = 0.0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    total += 1.0 / static_cast<double>(i + 1);
    cumulative[i] = total;
  }
  std::vector<std::size_t> out(n);
  for (std::size_t& r : out) {
    const double u = rng.uniform() * total;
    r = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    r = std::min(r, entries_.size() - 1);
  }
  return out;
}

LatentSampler::LatentSampler(std::size_t dim, SamplerConfig config, const RandomSource& init_rng)
    : dim_(dim), config_(config) {
  config_.validate();
  if (dim == 0) throw std::invalid_argument("sampler dimension must be >= 1");
  RandomSource rng = init_rng;
  net_ = MlpNet(MlpShape{dim + 1, config_.hidden_layers, config_.hidden_units, dim}.widths(), rng);
  net_.zero_output_layer();
  log_z_ = Parameter("log_z", Matrix::Zero(1, 1));
  rho_ = Parameter("log_variance", Matrix::Zero(static_cast<Eigen::Index>(config_.num_steps), 1));
}

Matrix LatentSampler::drift(const Matrix& z, double t) const { return net_.forward(with_time(z, t)); }

TrajectoryBatch LatentSampler::forward_trajectory(RandomSource& rng, std::size_t batch) const {
  const auto b = static_cast<Eigen::Index>(batch);
  const auto d = static_cast<Eigen::Index>(dim_);
  const std::size_t steps = config_.num_steps;
  const double h = dt();
  TrajectoryBatch out;
  out.states.reserve(steps + 1);
  out.states.push_back(Matrix::Zero(b, d));
  out.log_pf.resize(b, static_cast<Eigen::Index>(steps));
  for (std::size_t k = 0; k < steps; ++k) {
    const Matrix& z = out.states.back();
    const double var = config_.sigma * config_.sigma * h * std::exp(rho_.value(static_cast<Eigen::Index>(k), 0));
    const Matrix eps = rng.standard_normal(b, d);
    Matrix next = z + h * drift(z, static_cast<double>(k) * h) + std::sqrt(var) * eps;
    if (!next.allFinite()) throw NumericsError("forward_trajectory: non-finite state");
    out.log_pf.col(static_cast<Eigen::Index>(k)) =
        (-0.5 * eps.rowwise().squaredNorm()).array() - 0.5 * static_cast<double>(d) * (kLog2Pi + std::log(var));
    out.states.push_back(std::move(next));
  }
  out.log_pb = backward_log_prob(out.states);
  return out;
}

TrajectoryBatch LatentSampler::backward_trajectory(const Matrix& z1, RandomSource& rng) const {
  if (z1.cols() != static_cast<Eigen::Index>(dim_)) throw ShapeError("backward_trajectory: got " + shape_string(z1));
  const std::size_t steps = config_.num_steps;
  const double h = dt();
  TrajectoryBatch out;
  out.states.assign(steps + 1, Matrix());
  out.states[steps] = z1;
  for (std::size_t k = steps - 1; k >= 1; --k) {
    const double ratio = static_cast<double>(k) / static_cast<double>(k + 1);
    const double sd = std::sqrt(ratio * h) * config_.sigma;
    out.states[k] = ratio * out.states[k + 1] + sd * rng.standard_normal(z1.rows(), z1.cols());
  }
  out.states[0] = Matrix::Zero(z1.rows(), z1.cols());
  out.log_pf = forward_log_prob(out.states);
  out.log_pb = backward_log_prob(out.states);
  return out;
}

Matrix LatentSampler::forward_log_prob(const std::vector<Matrix>& states) const {
  const std::size_t steps = config_.num_steps;
  if (states.size() != steps + 1) throw ShapeError("forward_log_prob: wrong trajectory length");
  const double h = dt();
  const auto d = static_cast<double>(dim_);
  Matrix out(states.front().rows(), static_cast<Eigen::Index>(steps));
  for (std::size_t k = 0; k < steps; ++k) {
    const double var = config_.sigma * config_.sigma * h * std::exp(rho_.value(static_cast<Eigen::Index>(k), 0));
    const Matrix mean = states[k] + h * drift(states[k], static_cast<double>(k) * h);
    out.col(static_cast<Eigen::Index>(k)) =
        (-0.5 / var * (states[k + 1] - mean).rowwise().squaredNorm()).array() - 0.5 * d * (kLog2Pi + std::log(var));
  }
  return out;
}

Matrix LatentSampler::backward_log_prob(const std::vector<Matrix>& states) const {
  const std::size_t steps = config_.num_steps;
  if (states.size() != steps + 1) throw ShapeError("backward_log_prob: wrong trajectory length");
  const double h = dt();
  const auto d = static_cast<double>(dim_);
  Matrix out = Matrix::Zero(states.front().rows(), static_cast<Eigen::Index>(steps));
  for (std::size_t k = 1; k < steps; ++k) {
    const double ratio = static_cast<double>(k) / static_cast<double>(k + 1);
    const double var = ratio * h * config_.sigma * config_.sigma;
    out.col(static_cast<Eigen::Index>(k)) =
        (-0.5 / var * (states[k] - ratio * states[k + 1]).rowwise().squaredNorm()).array() -
        0.5 * d * (kLog2Pi + std::log(var));
  }
  return out;
}

Vector LatentSampler::tb_residuals(const TrajectoryBatch& batch) const {
  if (batch.log_reward.size() != static_cast<Eigen::Index>(batch.batch())) {
    throw ShapeError("tb_loss: trajectory batch has no terminal log-reward");
  }
  Vector r = (log_z() + batch.log_pf.rowwise().sum().array() - batch.log_reward.array() -
              batch.log_pb.rowwise().sum().array()).matrix();
  if (!r.allFinite()) throw NumericsError("tb_loss: non-finite terms");
  return r;
}

double LatentSampler::tb_loss(const TrajectoryBatch& batch) const { return tb_residuals(batch).squaredNorm() / static_cast<double>(batch.batch()); }

std::vector<Parameter*> LatentSampler::parameters() {
  std::vector<Parameter*> out = net_.parameters();
  out.push_back(&log_z_);
  out.push_back(&rho_);
  return out;
}

double LatentSampler::gradient_step(const TrajectoryBatch& batch, Adam& opt) {
  opt.zero_grad();
  const double value = accumulate_tb_gradients(batch);
  opt.step();
  return value;
}

double LatentSampler::accumulate_tb_gradients(const TrajectoryBatch& batch) {
  const auto steps = static_cast<Eigen::Index>(config_.num_steps);
  const auto b = static_cast<Eigen::Index>(batch.batch());
  const auto d = static_cast<Eigen::Index>(dim_);
  const double h = dt();
  const double base_var = config_.sigma * config_.sigma * h;

  // Rows are step-major: row k * B + j holds trajectory j at step k.
  Matrix input(steps * b, d + 1);
  Matrix delta(steps * b, d);
  std::vector<Eigen::Index> step_of_row(static_cast<std::size_t>(steps * b));
  for (Eigen::Index k = 0; k < steps; ++k) {
    const Matrix& z = batch.states[static_cast<std::size_t>(k)];
    input.block(k * b, 0, b, d) = z;
    input.block(k * b, d, b, 1).setConstant(static_cast<double>(k) * h);
    delta.block(k * b, 0, b, d) = batch.states[static_cast<std::size_t>(k + 1)] - z;
    for (Eigen::Index j = 0; j < b; ++j) step_of_row[static_cast<std::size_t>(k * b + j)] = k;
  }

  Tape tape;
  Var u = net_.forward(tape, tape.constant(std::move(input)));
  Var resid = ad::sub(tape.constant(std::move(delta)), ad::scale(u, h));
  Var sq = ad::row_sum(ad::square(resid));
  Var log_pf;
  if (config_.learn_variance) {
    Var rho = ad::gather_rows(tape.parameter(rho_), step_of_row);
    log_pf = ad::add(ad::scale(ad::mul(sq, ad::exp(ad::scale(rho, -1.0))), -0.5 / base_var),
                     ad::scale(rho, -0.5 * static_cast<double>(d)));
  } else {
    log_pf = ad::scale(sq, -0.5 / base_var);
  }
  log_pf = ad::add_constant(log_pf, -0.5 * static_cast<double>(d) * (kLog2Pi + std::log(base_var)));
  Var per_traj = ad::col_sum(ad::reshape(log_pf, steps, b));  // 1 x B

  const Matrix fixed = (-batch.log_reward - batch.log_pb.rowwise().sum()).transpose();
  Var residual = ad::add_scalar(ad::add(per_traj, tape.constant(fixed)), tape.parameter(log_z_));
  Var loss = ad::mean(ad::square(residual));
  const double value = loss.value()(0, 0);
  if (!std::isfinite(value)) throw NumericsError("sampler: non-finite trajectory-balance loss");
  tape.backward(loss);
  return value;
}

SamplerReport LatentSampler::train(const LogRewardFn& log_reward, RandomSource& rng, ReplayBuffer* buffer) {
  ReplayBuffer local(config_.buffer_factor * config_.batch_size);
  ReplayBuffer& buf = buffer ? *buffer : local;

  AdamConfig ac;
  ac.learning_rate = config_.learning_rate;
  Adam opt(ac);
  for (Parameter* p : net_.parameters()) opt.add(*p);
  opt.add(log_z_, config_.log_z_learning_rate);
  if (config_.learn_variance) opt.add(rho_);

  SamplerReport report;
  bool first = true;
  auto on_policy_step = [&]() {
    TrajectoryBatch batch = forward_trajectory(rng, config_.batch_size);
    batch.log_reward = log_reward(batch.terminal());
    if (!batch.log_reward.allFinite()) throw NumericsError("sampler: non-finite log-reward");
    if (first && config_.init_log_z_from_batch) {
      set_log_z(log_z() - tb_residuals(batch).mean());
    }
    first = false;
    buf.add(batch.terminal(), batch.log_reward);
    report.losses.push_back(gradient_step(batch, opt));
    report.log_z.push_back(log_z());
  };
  for (std::size_t it = 0; it < config_.iterations; ++it) {
    on_policy_step();
    if (!config_.off_policy) {
      on_policy_step();
      continue;
    }
    if (buf.empty()) continue;
    const std::vector<std::size_t> ranks = buf.sample_ranks(rng, config_.batch_size);
    Matrix z1(static_cast<Eigen::Index>(ranks.size()), static_cast<Eigen::Index>(dim_));
    Vector lr(static_cast<Eigen::Index>(ranks.size()));
    for (std::size_t i = 0; i < ranks.size(); ++i) {
      z1.row(static_cast<Eigen::Index>(i)) = buf.latent(ranks[i]).transpose();
      lr[static_cast<Eigen::Index>(i)] = -buf.energy(ranks[i]);
    }
    TrajectoryBatch batch = backward_trajectory(z1, rng);
    batch.log_reward = std::move(lr);
    report.losses.push_back(gradient_step(batch, opt));
    report.log_z.push_back(log_z());
  }
  return report;
}

Matrix LatentSampler::sample(RandomSource& rng, std::size_t n) const {
  const auto d = static_cast<Eigen::Index>(dim_);
  const double h = dt();
  Matrix z = Matrix::Zero(static_cast<Eigen::Index>(n), d);
  for (std::size_t k = 0; k < config_.num_steps; ++k) {
    const double sd = config_.sigma * std::sqrt(h * std::exp(rho_.value(static_cast<Eigen::Index>(k), 0)));
    const Matrix eps = rng.standard_normal(z.rows(), d);
    z += h * drift(z, static_cast<double>(k) * h) + sd * eps;
  }
  if (!z.allFinite()) throw NumericsError("sample_latents: non-finite state");
  return z;
}

}  // namespace cibo
