#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <thread>
#include <vector>

namespace ldp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Compensated (Kahan) accumulator; keeps long sums of small terms exact to
/// a few ulps even when the running sum dwarfs the increments.
class KahanSum {
 public:
  void add(double x) noexcept {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const noexcept { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

/// log(cosh(x)) without overflow for large |x|.
inline double log_cosh(double x) noexcept {
  const double a = std::fabs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - 0.6931471805599453094;
}

/// log(sinh(x)/x); even, log_sinhc(0) = 0.
inline double log_sinhc(double x) noexcept {
  const double a = std::fabs(x);
  if (a < 0.1) {
    const double u = a * a;
    // sinh(a)/a - 1 = u/6 (1 + u/20 (1 + u/42))
    return std::log1p(u / 6.0 * (1.0 + u / 20.0 * (1.0 + u / 42.0)));
  }
  if (a < 20.0) return std::log(std::sinh(a) / a);
  return a - std::log(2.0 * a) + std::log1p(std::exp(-2.0 * a));
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares line through (x_i, y_i).
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

/// Runs fn(chunk) for chunk in [0, n_chunks) across `threads` workers.
/// Callers write results into per-chunk slots; the slot layout, not the
/// scheduling, fixes the output, so any thread count gives identical results.
inline void parallel_for_chunks(std::size_t n_chunks, int threads,
                                const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n_chunks <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) fn(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      fn(c);
    }
  };
  std::vector<std::thread> pool;
  const int k = static_cast<int>(std::min<std::size_t>(threads, n_chunks));
  pool.reserve(k);
  for (int i = 0; i < k; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace ldp
