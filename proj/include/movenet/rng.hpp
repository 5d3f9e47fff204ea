#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <random>

namespace movenet {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Deterministic random source. All distributions are implemented explicitly
/// so that draw sequences are identical across platforms and standard library
/// versions; std::mt19937_64 only supplies the raw bit stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return (gen_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  /// Standard normal, Box-Muller. Two uniforms per call, no caching.
  double normal() {
    constexpr double two_pi = 6.283185307179586476925287;
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in {0, ..., bound-1}.
  int uniform_int(int bound) {
    if (bound <= 0) throw std::invalid_argument("Rng::uniform_int: bound must be > 0");
    const std::uint64_t n = static_cast<std::uint64_t>(bound);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
      r = gen_();
    } while (r >= limit);
    return static_cast<int>(r % n);
  }

  /// Gamma(shape, rate), Marsaglia-Tsang squeeze; shape < 1 via the boost
  /// G(a) = G(a+1) U^{1/a}.
  double gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
      throw std::invalid_argument("Rng::gamma: shape and rate must be > 0");
    if (shape < 1.0) {
      const double u = uniform_pos();
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double cc = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + cc * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  double inverse_gamma(double shape, double rate) { return 1.0 / gamma(shape, rate); }

  /// Child generator with a stream id. Independent of the parent's draw
  /// position, so the same (seed, stream) pair always yields the same stream.
  Rng spawn(std::uint64_t stream) const {
    return Rng(splitmix64(seed_ ^ splitmix64(stream ^ 0x632be59bd9b4e019ull)));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace movenet
