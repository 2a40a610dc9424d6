#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "cibo/numerics/mlp.hpp"
#include "cibo/problems/problem.hpp"

namespace cibo {

/// v(x, t) evaluated row-wise: x is (n x D), t is (n x 1); returns (n x D).
using VelocityField = std::function<Matrix(const Matrix& x, const Matrix& t)>;

/// Monte Carlo estimate of sum_i w_i * E || v(x_t, t) - (x_i - x_0) ||^2 with
/// x_t = (1 - t) x_0 + t x_i, x_0 ~ N(0, I), t ~ U(0, 1).
///
/// For each record with positive weight, in order, `draws_per_record` pairs are
/// drawn as D normals for x_0 followed by one uniform for t. Records with zero
/// weight draw nothing. Weights need not be normalized.
double fm_loss(const VelocityField& field, const Matrix& x, std::span<const double> weights,
               RandomSource& rng, std::size_t draws_per_record = 1);

/// Fixed-step RK4 integration of dx/dt = v(x, t) from t = 0 to t = 1, one
/// trajectory per row of z.
Matrix integrate_rk4(const VelocityField& field, const Matrix& z, std::size_t steps);

struct FlowConfig {
  std::size_t hidden_layers = 3;
  std::size_t hidden_units = 512;
  std::size_t epochs = 500;
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;
  std::size_t integration_steps = 250;

  void validate() const;
};

/// Flow-matching prior over the model space [-1, 1]^D. The velocity network
/// takes (x, t) as D + 1 inputs; its output layer starts at zero so an
/// untrained prior is the identity map.
class FlowPrior {
 public:
  FlowPrior(std::size_t dim, FlowConfig config, const RandomSource& init_rng);

  std::size_t dim() const { return dim_; }
  const FlowConfig& config() const { return config_; }
  MlpNet& net() { return net_; }
  const MlpNet& net() const { return net_; }

  Matrix velocity(const Matrix& x, const Matrix& t) const;
  VelocityField field() const;

  /// Minimizes the weighted flow-matching loss with minibatches drawn
  /// uniformly over the positive-weight records, each record's loss scaled by
  /// N w_i. Returns the mean minibatch loss of each epoch.
  std::vector<double> train(const Matrix& x, std::span<const double> weights, RandomSource& rng);

  /// f(z): RK4 push-forward of each row of z. Throws NumericsError if the
  /// trajectory leaves the finite range.
  Matrix push_forward(const Matrix& z) const;

  /// n model-space points f(z) with z ~ N(0, I).
  Matrix sample(RandomSource& rng, std::size_t n) const;

 private:
  std::size_t dim_;
  FlowConfig config_;
  MlpNet net_;
};

/// Prior samples mapped back to the problem domain.
Matrix sample_prior(const FlowPrior& prior, const BoxScaler& scaler, RandomSource& rng, std::size_t n);

}  // namespace cibo
