#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace spectrade {

// Seeded random stream. The engine is std::mt19937_64, whose output sequence
// is fixed by the C++ standard; the distributions below are implemented here
// (not std::*_distribution, whose algorithms are implementation-defined), so a
// given seed replays the same draws on every conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random mantissa bits.
  double uniform01();

  // Uniform on [lo, hi); returns lo when lo == hi.
  double uniform(double lo, double hi);

  // Poisson(mean) by sequential CDF inversion. Means above 500 are split into
  // independent Poisson(500) chunks plus a remainder.
  std::uint64_t poisson(double mean);

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

// Deterministic sub-stream seed from a root seed and a key path
// (e.g. {experiment, sweep point, episode}). Order of keys matters.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> keys);

inline Rng derive_stream(std::uint64_t root, std::initializer_list<std::uint64_t> keys) {
  return Rng(derive_seed(root, keys));
}

}  // namespace spectrade
