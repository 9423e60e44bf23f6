#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace virolfi {

/// SplitMix64 finaliser; the mixing step behind derive_seed.
std::uint64_t splitmix64(std::uint64_t x);

/// Derives an independent stream key from a master seed and a path of
/// integer tags (attempt index, experiment, realisation, ...). Equal paths give
/// equal keys, so the stream a component sees does not depend on how much
/// randomness other components consumed before it.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// Random source used throughout the library. Satisfies
/// UniformRandomBitGenerator so it plugs into <random> distributions.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  std::uint64_t next_u64() { return engine_(); }

  /// Child stream keyed by the next value of this stream and a tag.
  Rng split(std::uint64_t tag);

 private:
  std::mt19937_64 engine_;
};

}  // namespace virolfi
