#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace fibdyn {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Mix a base seed with a stream index (per-cell seeds, per-map seeds, ...).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t s = base ^ (0x9e3779b97f4a7c15ull * (stream + 1));
  return splitmix64(s);
}

// xoshiro256** seeded through splitmix64. We roll our own uniforms instead of
// <random> distributions so that streams are bit-identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    for (auto& w : s_) w = splitmix64(seed);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0,1).
  double uniform01() { return double(next() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Unbiased integer in [0,n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

  std::complex<double> on_circle(double radius = 1.0) {
    const double phi = 2.0 * M_PI * uniform01();
    return {radius * std::cos(phi), radius * std::sin(phi)};
  }

  std::complex<double> in_disk(double radius = 1.0) {
    const double r = radius * std::sqrt(uniform01());
    return on_circle(r);
  }

  /// Standard complex gaussian (Box-Muller).
  std::complex<double> gaussian() {
    double u = uniform01();
    if (u <= 0.0) u = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u));
    const double phi = 2.0 * M_PI * uniform01();
    return {r * std::cos(phi), r * std::sin(phi)};
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace fibdyn
