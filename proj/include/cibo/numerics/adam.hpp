#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cibo/numerics/autodiff.hpp"

namespace cibo {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam over a fixed set of parameters.
///
///   m <- b1 m + (1 - b1) g;  v <- b2 v + (1 - b2) g^2
///   p <- p - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
///
/// Parameters are held by pointer and must outlive the optimizer.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}
  Adam(std::vector<Parameter*> params, AdamConfig config);

  /// Registers a parameter, optionally with its own learning rate.
  void add(Parameter& param, std::optional<double> learning_rate = std::nullopt);

  /// Applies one update from the current Parameter::grad values. Throws
  /// NumericsError if a gradient is non-finite; nothing is updated in that case.
  void step();
  void zero_grad();

  std::int64_t step_count() const { return step_; }
  const AdamConfig& config() const { return config_; }
  const Matrix& first_moment(std::size_t i) const { return slots_.at(i).m; }
  const Matrix& second_moment(std::size_t i) const { return slots_.at(i).v; }

 private:
  struct Slot {
    Parameter* param;
    double learning_rate;
    Matrix m;
    Matrix v;
  };

  AdamConfig config_;
  std::vector<Slot> slots_;
  std::int64_t step_ = 0;
};

}  // namespace cibo
