#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <stdexcept>

namespace lvs {

// splitmix64 mixing step. Used to expand seeds and derive sub-stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from a base seed and a tag list
/// (figure id, cell index, second counter, ...). Pure integer mixing,
/// identical on every platform.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = base;
  std::uint64_t out = splitmix64(s);
  for (std::uint64_t t : tags) {
    s = out ^ (t * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    out = splitmix64(s);
  }
  return out;
}

/// Inverse CDF of the exponential law with the given rate (1/ns):
/// phi = -ln(1-u)/rate for u in [0,1). Nonnegative; u=0 maps to 0.
inline double exponential_icdf(double u, double rate) {
  if (!(rate > 0.0)) {
    throw std::invalid_argument("exponential rate must be > 0");
  }
  return -std::log1p(-u) / rate;
}

/// Seedable 64-bit generator (xoshiro256++, seeded through splitmix64).
/// Not shareable between threads; each concurrent task owns its own stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0,1), 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform_in(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Box-Muller transform, cosine branch. Consumes exactly two uniforms
  /// per call; no cached spare, so the draw sequence stays reproducible.
  double gaussian(double mean, double stddev) {
    const double u1 = 1.0 - uniform();  // (0,1], keeps the log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Exponential draw by inverse CDF; rate in 1/ns. Throws on rate <= 0.
  double exponential(double rate) { return exponential_icdf(uniform(), rate); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace lvs
