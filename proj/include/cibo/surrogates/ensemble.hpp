#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cibo/numerics/mlp.hpp"
#include "cibo/surrogates/lagrangian.hpp"

namespace cibo {

/// Per-column affine map v -> (v - mean) / scale.
struct Normalizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  /// Column mean and population std; std below `floor` is replaced by `floor`.
  static Normalizer fit(const Matrix& data, double floor = 1e-8);
  static Normalizer identity(Eigen::Index cols);

  Matrix normalize(const Matrix& v) const;
  Matrix denormalize(const Matrix& v) const;
};

struct SurrogateConfig {
  std::size_t ensemble_size = 5;
  std::size_t hidden_layers = 3;
  std::size_t hidden_units = 1024;
  std::size_t epochs = 100;
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;
  /// Constraint labels are 0/1 and are regressed as-is.
  bool indicator_mode = false;

  void validate() const;
};

/// Mean epoch losses of every network, objective members first.
struct FitReport {
  std::vector<std::vector<double>> epoch_losses;
};

/// Objective ensemble (mean and spread) and one proxy per constraint.
class SurrogateEnsemble {
 public:
  SurrogateEnsemble() = default;
  /// Assembles an ensemble from existing networks. Every net maps D inputs to
  /// one output in normalized units.
  SurrogateEnsemble(std::vector<MlpNet> objective, std::vector<MlpNet> constraints, Normalizer x,
                    Normalizer y, Normalizer c);

  /// Trains a fresh ensemble on `data`, minimizing for each net
  ///   mean over minibatch of N * w_i * (target_i - f(x_i))^2.
  /// Records with weight exactly zero are dropped first, so they have no
  /// influence at all (N counts the remaining records). Member k is
  /// initialized and shuffled from rng.fork(k); constraint proxy m from
  /// rng.fork(K + m).
  static SurrogateEnsemble fit(const WeightedDataset& data, const SurrogateConfig& config,
                               const RandomSource& rng, FitReport* report = nullptr);

  bool trained() const { return !objective_.empty(); }
  std::size_t ensemble_size() const { return objective_.size(); }
  std::size_t num_constraints() const { return constraints_.size(); }

  struct ObjectivePrediction {
    Vector mean;
    Vector std;
  };
  /// Mean and population std over members, in y units.
  ObjectivePrediction predict_objective(const Matrix& x) const;
  /// (n x M) predicted constraint values in c units.
  Matrix predict_constraints(const Matrix& x) const;

  /// Reward exponent per row with mu, sigma and the constraint predictions
  /// expressed in the units of `scaling`.
  Vector reward(const Matrix& x, const LagrangianParams& params, const ScoreScaling& scaling) const;

 private:
  void require_trained() const;

  std::vector<MlpNet> objective_;
  std::vector<MlpNet> constraints_;
  Normalizer x_norm_;
  Normalizer y_norm_;
  Normalizer c_norm_;
};

/// Fits one single-output regressor with a per-record loss multiplier.
/// Returns the mean minibatch loss of each epoch. Throws NumericsError naming
/// `label` and the epoch if the loss becomes non-finite.
std::vector<double> train_weighted_regressor(MlpNet& net, const Matrix& x, const Vector& target,
                                             const Vector& multiplier, std::size_t epochs,
                                             std::size_t batch_size, double learning_rate,
                                             RandomSource& rng, const std::string& label);

}  // namespace cibo
