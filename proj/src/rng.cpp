#include "virolfi/rng.hpp"

#include <cmath>

namespace virolfi {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t key = splitmix64(master);
  for (std::uint64_t tag : path) key = splitmix64(key ^ splitmix64(tag + 0x632be59bd9b4e019ULL));
  return key;
}

double Rng::uniform() {
  // 53 random mantissa bits; never returns 1.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  // Marsaglia polar method without caching, so a draw consumes a fixed
  // number of engine outputs regardless of call history.
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return u * std::sqrt(-2.0 * std::log(s) / s);
}

Rng Rng::split(std::uint64_t tag) { return Rng(derive_seed(engine_(), {tag})); }

}  // namespace virolfi
