// include/forager/rng.hpp
//
// Seeded random source. Variates are produced by explicit transforms of the
// raw 64-bit engine output so that streams are identical across standard
// library implementations.

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace forager {

/// splitmix64 finalizer; used to derive independent substream seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

/// Seed for substream (a, b) of a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform on (0, 1]; safe as a log argument.
  double uniform_open() { return 1.0 - uniform(); }

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n);

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal (Box-Muller, one variate per call pair).
  double normal();

  /// Unit-rate exponential.
  double exponential();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace forager
