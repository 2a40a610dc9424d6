#pragma once

#include <cstddef>
#include <vector>

#include "cibo/numerics/autodiff.hpp"
#include "cibo/numerics/random.hpp"

namespace cibo {

/// Architecture of a dense feed-forward network: GELU after every hidden layer,
/// identity at the output.
struct MlpShape {
  std::size_t input = 0;
  std::size_t hidden_layers = 0;
  std::size_t hidden_units = 0;
  std::size_t output = 0;

  std::vector<std::size_t> widths() const;
};

class MlpNet {
 public:
  MlpNet() = default;

  /// Uniform fan-in initialization: every weight and bias of layer i is drawn
  /// from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  MlpNet(std::vector<std::size_t> widths, RandomSource& rng);

  /// All weights and biases set to zero.
  static MlpNet zeros(std::vector<std::size_t> widths);

  const std::vector<std::size_t>& widths() const { return widths_; }
  std::size_t input_dim() const { return widths_.front(); }
  std::size_t output_dim() const { return widths_.back(); }
  std::size_t num_layers() const { return weights_.size(); }
  std::size_t parameter_count() const;

  /// Layer i maps rows x to x * W_i + b_i; W_i is (fan_in x fan_out).
  Parameter& weight(std::size_t layer) { return weights_.at(layer); }
  Parameter& bias(std::size_t layer) { return biases_.at(layer); }
  const Parameter& weight(std::size_t layer) const { return weights_.at(layer); }
  const Parameter& bias(std::size_t layer) const { return biases_.at(layer); }

  void zero_output_layer();

  /// Tape-free forward pass over a batch (one sample per row).
  Matrix forward(const Matrix& batch) const;

  /// Forward pass recorded on `tape` for differentiation.
  Var forward(Tape& tape, Var batch);

  std::vector<Parameter*> parameters();
  void zero_grad();

 private:
  void check_input(const Matrix& batch) const;

  std::vector<std::size_t> widths_;
  std::vector<Parameter> weights_;
  std::vector<Parameter> biases_;
};

}  // namespace cibo
