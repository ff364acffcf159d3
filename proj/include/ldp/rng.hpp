#pragma once

#include <cmath>
#include <cstdint>

namespace ldp {

/// Quantile of the standard normal. Acklam's rational approximation followed
/// by one Halley refinement against erfc; absolute error below 1e-14 on
/// (1e-300, 1 - 1e-16).
double inverse_normal_cdf(double p);

/// log P(N(0,1) > z) for any z; switches to the asymptotic continued series
/// once erfc would lose precision.
double log_gauss_upper_tail(double z);

/// P(N(0,1) > z); underflows to 0 for z beyond ~38, use the log form there.
inline double gauss_upper_tail(double z) { return std::exp(log_gauss_upper_tail(z)); }

/// Counter-based random stream: every variate is addressed by
/// (seed, stream, counter), so draws are reproducible under any scheduling
/// and any thread count. Mixing is three chained splitmix64 rounds.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const noexcept {
    std::uint64_t h = splitmix(seed_ ^ 0x8f1bbcdcbfa53e0bULL);
    h = splitmix(h ^ stream);
    h = splitmix(h ^ counter);
    return h;
  }

  /// Uniform on (0,1), never exactly 0 or 1.
  double uniform(std::uint64_t stream, std::uint64_t counter) const noexcept {
    return (static_cast<double>(bits(stream, counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal(std::uint64_t stream, std::uint64_t counter) const {
    return inverse_normal_cdf(uniform(stream, counter));
  }

 private:
  static std::uint64_t splitmix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
};

}  // namespace ldp
