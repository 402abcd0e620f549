#pragma once

#include <cstdint>
#include <random>

#include "afrelay/linalg.hpp"

namespace afrelay {

/// Purpose tags keep channel, symbol and noise draws on independent streams.
enum class StreamTag : std::uint64_t { channel = 1, symbols = 2, noise = 3, test = 4 };

/// Deterministic random stream.
///
/// Algorithm (version 1): the key is splitmix64 folded over
/// (seed, trial_index, tag); it seeds std::mt19937_64, whose output sequence is
/// fixed by the C++ standard. Uniforms use the top 53 bits; normals use the
/// Box-Muller transform. No implementation-defined std distributions are used,
/// so draws are bit-reproducible across standard libraries.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t trial_index, StreamTag tag);
  explicit RandomStream(std::uint64_t seed) : RandomStream(seed, 0, StreamTag::test) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  double standard_normal();
  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  Complex complex_normal(double variance = 1.0);
  ComplexMatrix complex_gaussian(Eigen::Index rows, Eigen::Index cols, double variance = 1.0);

  static std::uint64_t splitmix64(std::uint64_t x);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace afrelay
