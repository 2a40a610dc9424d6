#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "cibo/numerics/adam.hpp"
#include "cibo/numerics/mlp.hpp"

namespace cibo {

class FlowPrior;
class BoxScaler;

/// Batched log-reward: one value per row of z.
using LogRewardFn = std::function<Vector(const Matrix& z)>;
/// Batched reward exponent r(x) over domain points, one value per row.
using RewardFn = std::function<Vector(const Matrix& x)>;

/// log N(z; 0, I) per row.
Vector standard_normal_log_density(const Matrix& z);

/// log p(z) + beta * r(f(z)), where f is the prior push-forward with its
/// output mapped to the problem box and clamped.
class TargetLogDensity {
 public:
  TargetLogDensity(const FlowPrior& prior, const BoxScaler& scaler, RewardFn reward, double beta);

  Vector operator()(const Matrix& z) const;
  /// Domain points f(z), clamped to the box.
  Matrix decode(const Matrix& z) const;
  /// log p(z) + beta * r(x) for already decoded x.
  Vector log_reward(const Matrix& z, const Matrix& x) const;

 private:
  const FlowPrior& prior_;
  const BoxScaler& scaler_;
  RewardFn reward_;
  double beta_;
};

struct SamplerConfig {
  std::size_t hidden_layers = 2;
  std::size_t hidden_units = 256;
  std::size_t num_steps = 50;
  double sigma = 1.0;
  std::size_t batch_size = 256;
  /// Each iteration is one on-policy step followed by one off-policy step
  /// (or a second on-policy step when off_policy is false).
  std::size_t iterations = 50;
  double learning_rate = 1e-3;
  double log_z_learning_rate = 1e-3;
  std::size_t buffer_factor = 10;
  bool off_policy = true;
  /// Learn a per-step log-scale of the forward noise variance.
  bool learn_variance = true;
  /// Set log Z to its batch-optimal value on the first on-policy batch.
  bool init_log_z_from_batch = true;

  void validate() const;
};

/// Terminal latents ordered by energy -log R, lowest first. The highest-energy
/// entries are evicted when full. Sampling picks rank i with probability
/// proportional to 1 / (i + 1).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void add(const Matrix& z, const Vector& log_reward);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }
  void clear() { entries_.clear(); }

  /// Ranks drawn with replacement.
  std::vector<std::size_t> sample_ranks(RandomSource& rng, std::size_t n) const;
  const Vector& latent(std::size_t rank) const { return entries_.at(rank).z; }
  double energy(std::size_t rank) const { return entries_.at(rank).energy; }

 private:
  struct Entry {
    Vector z;
    double energy;
  };
  std::size_t capacity_;
  std::vector<Entry> entries_;
};

/// Trajectories z_0 = 0, z_{1/T}, ..., z_1 for a batch.
struct TrajectoryBatch {
  /// T + 1 states, each (B x D).
  std::vector<Matrix> states;
  /// (B x T) per-transition log-densities; column k is the step k -> k + 1.
  Matrix log_pf;
  Matrix log_pb;
  /// Terminal log-reward, filled in by the caller.
  Vector log_reward;

  const Matrix& terminal() const { return states.back(); }
  std::size_t batch() const { return states.empty() ? 0 : static_cast<std::size_t>(states.front().rows()); }
};

struct SamplerReport {
  std::vector<double> losses;
  std::vector<double> log_z;
};

/// Diffusion sampler in latent space trained with trajectory balance.
///
/// Forward kernel:  z_{k+1} = z_k + u(z_k, t_k) dt + sigma sqrt(dt) exp(rho_k / 2) eps
/// Backward kernel: the Brownian bridge pinned at z_0 = 0,
///   z_k | z_{k+1} ~ N(k / (k+1) z_{k+1}, k / (k+1) dt sigma^2 I),
/// deterministic (log-density 0) for k = 0.
/// The drift output layer and rho start at zero, so the untrained sampler is
/// the reference Brownian motion with z_1 ~ N(0, sigma^2 I).
class LatentSampler {
 public:
  LatentSampler(std::size_t dim, SamplerConfig config, const RandomSource& init_rng);

  std::size_t dim() const { return dim_; }
  const SamplerConfig& config() const { return config_; }
  double dt() const { return 1.0 / static_cast<double>(config_.num_steps); }
  double log_z() const { return log_z_.value(0, 0); }
  void set_log_z(double v) { log_z_.value(0, 0) = v; }
  /// Per-step log-scale rho (T x 1).
  const Matrix& log_variance() const { return rho_.value; }
  MlpNet& net() { return net_; }

  Matrix drift(const Matrix& z, double t) const;

  TrajectoryBatch forward_trajectory(RandomSource& rng, std::size_t batch) const;
  TrajectoryBatch backward_trajectory(const Matrix& z1, RandomSource& rng) const;

  /// (B x T) forward log-densities of the given states under the current model.
  Matrix forward_log_prob(const std::vector<Matrix>& states) const;
  /// (B x T) bridge log-densities.
  Matrix backward_log_prob(const std::vector<Matrix>& states) const;

  /// Per-trajectory log Z + sum log p_F - log R - sum log p_B.
  Vector tb_residuals(const TrajectoryBatch& batch) const;
  /// Mean squared residual.
  double tb_loss(const TrajectoryBatch& batch) const;
  /// Recomputes the forward log-densities of the batch states under the
  /// current parameters, accumulates d(tb_loss)/d(parameter) into each
  /// Parameter::grad and returns the loss. States are treated as constants.
  double accumulate_tb_gradients(const TrajectoryBatch& batch);

  /// Drift weights, then log Z, then the log-variance table.
  std::vector<Parameter*> parameters();

  /// Alternates on-policy and off-policy trajectory-balance steps. Terminals
  /// of on-policy batches are added to `buffer` (capacity buffer_factor *
  /// batch_size when none is passed).
  SamplerReport train(const LogRewardFn& log_reward, RandomSource& rng, ReplayBuffer* buffer = nullptr);

  /// n terminal latents of independent forward trajectories.
  Matrix sample(RandomSource& rng, std::size_t n) const;

 private:
  double gradient_step(const TrajectoryBatch& batch, Adam& opt);

  std::size_t dim_;
  SamplerConfig config_;
  MlpNet net_;
  Parameter log_z_;
  Parameter rho_;
};

}  // namespace cibo
