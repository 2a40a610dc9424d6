#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "cibo/numerics/matrix.hpp"

namespace cibo {

/// Seeded random stream with a fully specified draw sequence.
///
/// The engine is `std::mt19937_64`, whose output sequence is fixed by the C++
/// standard. Derived variates do not use the implementation-defined standard
/// distributions:
///   - uniform():  (next_u64() >> 11) * 2^-53, in [0, 1)
///   - normal():   Box-Muller on two uniforms u1, u2 with u1 mapped to (0, 1];
///                 the cosine branch is returned first and the sine branch is
///                 cached for the following call
///   - index(n):   rejection sampling on next_u64() to remove modulo bias
/// Child streams are derived with splitmix64 so that separate consumers (network
/// initialization, minibatch shuffles, trajectory noise) never share draws.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  double uniform();
  double uniform(double lo, double hi);
  double normal();
  std::size_t index(std::size_t n);

  Matrix standard_normal(Eigen::Index rows, Eigen::Index cols);
  Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi);

  /// Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

  /// Independent child stream keyed by `stream`. Does not advance this stream.
  RandomSource fork(std::uint64_t stream) const;
  RandomSource fork(std::string_view label) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace cibo
