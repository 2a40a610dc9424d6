#pragma once

#include <span>
#include <vector>

#include "cibo/problems/problem.hpp"

namespace cibo {

/// Multiplier, exploration bonus and inverse temperature of the relaxed score.
struct LagrangianParams {
  double lambda = 10.0;
  double gamma = 1.0;
  double beta = 1e5;

  void validate() const;
};

/// l(y, c) = y - lambda * sum_m max(0, c_m).
double lagrangian_score(double y, const Vector& c, double lambda);

/// r = mu + gamma * sigma - lambda * sum_m max(0, g_m).
double reward_exponent(double mu, double sigma, const Vector& g_hat, const LagrangianParams& params);

/// Round-level scaling applied before scores are compared or exponentiated:
/// y and each c_m are z-scored with dataset statistics, and the penalty is
/// lambda * sum max(0, standardized c_m). Indicator labels stay raw.
struct ScoreScaling {
  double y_mean = 0.0;
  double y_scale = 1.0;
  /// Empty means zero offset / unit scale for every constraint.
  Vector violation_mean;
  Vector violation_scale;

  static ScoreScaling identity() { return {}; }
  /// Population statistics of the records. Indicator labels are left
  /// unscaled. Spreads below 1e-8 fall back to 1.
  static ScoreScaling fit(std::span<const EvalRecord> records, bool indicator_mode);

  double objective(double y) const { return (y - y_mean) / y_scale; }
  double objective_spread(double sigma) const { return sigma / y_scale; }
  double violation(const Vector& c) const;
  double score(const EvalRecord& r, double lambda) const {
    return objective(r.y) - lambda * violation(r.c);
  }
};

/// Records with normalized nonnegative weights.
struct WeightedDataset {
  std::vector<EvalRecord> records;
  std::vector<double> weights;

  std::size_t size() const { return records.size(); }
  /// (n x D) matrix of inputs.
  Matrix inputs() const;
};

/// Max-shifted softmax. Throws on empty input.
std::vector<double> softmax(std::span<const double> logits);

/// w_i = exp(l_i) / sum_j exp(l_j) with l computed under `scaling`.
WeightedDataset compute_weights(std::vector<EvalRecord> records, double lambda,
                                const ScoreScaling& scaling = ScoreScaling::identity());

}  // namespace cibo
