#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dbp {

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of replication r in an ensemble seeded with `seed`.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t r) {
  return mix64(mix64(seed) ^ mix64(r + 0x632be59bd9b4e019ULL));
}

/// mt19937_64 with variates built directly from its output bits, so that
/// streams do not depend on the standard library's distribution classes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Exponential with the given rate.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dbp
