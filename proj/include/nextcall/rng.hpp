#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nextcall {

/// splitmix64 step; used to stretch a user seed into stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d4a4a9b5e8b3e3ULL;
  return z ^ (z >> 31);
}

/// Deterministic per-stream seed from (seed, a, b).  Distinct (a, b) pairs
/// give independent streams, so generation order never depends on threading.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = seed;
  std::uint64_t x = splitmix64(s);
  s ^= a * 0x9e3779b97f4a7c15ULL;
  x ^= splitmix64(s);
  s ^= b * 0xc2b2ae3d27d4eb4fULL;
  x ^= splitmix64(s);
  return x;
}

/// mt19937_64 with hand-rolled variate transforms.  Standard distribution
/// objects are implementation-defined, so outputs would differ across
/// standard libraries; these transforms pin the byte stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Fisher-Yates index for shuffles: uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n));
  }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  /// Box-Muller, first branch only; deterministic and stateless.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace nextcall
