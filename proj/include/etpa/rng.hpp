#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

// Seeded counting statistics. Substreams are derived from (seed, index) so
// that draws for one record never depend on how many draws another record
// consumed; outputs are bit-identical regardless of execution order.

namespace etpa::rng {

inline constexpr const char* kGeneratorId = "splitmix64+ptrs";

/// 64-bit state generator (Steele, Lea, Flood splitmix64).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic substream for (seed, index).
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64(mix64(seed + 0x9e3779b97f4a7c15ULL * (index + 1)));
}

/// log Gamma(x) for x > 0, via the Stirling series with the standard
/// correction coefficients. Self-contained so Poisson sampling stays free of
/// the signgam global that lgamma() touches.
inline double log_gamma(double x) {
  static constexpr double a[10] = {
      8.333333333333333e-02,  -2.777777777777778e-03, 7.936507936507937e-04,
      -5.952380952380952e-04, 8.417508417508418e-04,  -1.917526917526918e-03,
      6.410256410256410e-03,  -2.955065359477124e-02, 1.796443723688307e-01,
      -1.39243221690590e+00};
  if (x == 1.0 || x == 2.0) return 0.0;
  double x0 = x;
  int n = 0;
  if (x <= 7.0) {
    n = static_cast<int>(7.0 - x);
    x0 = x + n;
  }
  const double x2 = 1.0 / (x0 * x0);
  double gl0 = a[9];
  for (int k = 8; k >= 0; --k) gl0 = gl0 * x2 + a[k];
  double gl = gl0 / x0 + 0.5 * std::log(2.0 * 3.14159265358979323846) +
              (x0 - 0.5) * std::log(x0) - x0;
  if (x <= 7.0) {
    for (int k = 1; k <= n; ++k) {
      x0 -= 1.0;
      gl -= std::log(x0);
    }
  }
  return gl;
}

/// Poisson draw with the given mean. Knuth product method below mean 10,
/// Hormann's PTRS transformed rejection above (the numpy switch-over).
inline long long poisson(SplitMix64& gen, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw std::domain_error("poisson: mean must be finite and nonnegative");
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    const double enlam = std::exp(-mean);
    long long x = 0;
    double prod = 1.0;
    for (;;) {
      prod *= gen.uniform();
      if (prod <= enlam) return x;
      ++x;
    }
  }
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = gen.uniform() - 0.5;
    const double v = gen.uniform();
    const double us = 0.5 - std::abs(u);
    const auto k =
        static_cast<long long>(std::floor((2.0 * a / us + b) * u + mean + 0.43));
    if (us >= 0.07 && v <= vr) return k;
    if (k < 0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mean + static_cast<double>(k) * loglam - log_gamma(static_cast<double>(k) + 1.0))
      return k;
  }
}

}  // namespace etpa::rng
