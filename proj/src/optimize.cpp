#include "ldp/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ldp/util.hpp"

namespace ldp {

namespace {

constexpr double kGolden = 0.6180339887498948482;

bool is_rise(double before, double after, double tol) {
  return after > before + std::max(tol, 1e-12 * (1.0 + std::fabs(after)));
}

}  // namespace

Maximize1Result maximize_concave_1d(const std::function<double(double)>& g,
                                    double lo, double hi, double start,
                                    double tol, double probe_radius) {
  Maximize1Result out;
  double m = start;
  if (!(m > lo) || !(m < hi)) {
    if (std::isfinite(lo) && std::isfinite(hi)) m = 0.5 * (lo + hi);
    else if (std::isfinite(lo)) m = lo + 1.0;
    else if (std::isfinite(hi)) m = hi - 1.0;
    else m = 0.0;
  }
  double fm = g(m);
  if (!std::isfinite(fm)) {
    // Scan for a finite foothold inside the box.
    const double a = std::isfinite(lo) ? lo : m - probe_radius;
    const double b = std::isfinite(hi) ? hi : m + probe_radius;
    fm = -kInf;
    for (int i = 1; i < 64; ++i) {
      const double x = a + (b - a) * i / 64.0;
      const double fx = g(x);
      if (fx > fm) { fm = fx; m = x; }
    }
    if (!std::isfinite(fm)) {
      out.arg = m;
      out.value = fm;
      return out;
    }
  }

  // Expand in one direction until the value drops or the radius is hit.
  auto expand = [&](double dir) -> double {
    double step = std::max(1.0, 0.25 * std::fabs(m));
    double edge = m, fedge = fm;
    for (;;) {
      const double wall = dir > 0 ? hi : lo;
      double cand;
      if (std::isfinite(wall)) {
        cand = edge + dir * step;
        const double cap = edge + 0.9 * (wall - edge);
        if ((dir > 0 && cand > cap) || (dir < 0 && cand < cap)) cand = cap;
      } else {
        cand = edge + dir * step;
      }
      if (std::fabs(cand - edge) < 1e-300) break;
      const double fcand = g(cand);
      if (fcand <= fedge || !std::isfinite(fcand)) {
        if (std::isfinite(fcand) || edge != m) return cand;
        // -inf right next to the best point: shrink toward it instead.
        step *= 0.25;
        if (step < 1e-12 * (1.0 + std::fabs(edge))) return cand;
        continue;
      }
      if (std::fabs(cand - start) >= probe_radius) {
        if (is_rise(fedge, fcand, tol)) out.rising_at_radius = true;
        edge = cand;
        fedge = fcand;
        break;
      }
      edge = cand;
      fedge = fcand;
      step *= 3.0;
    }
    if (fedge > fm) { fm = fedge; m = edge; }
    return edge;
  };

  double right = expand(+1.0);
  double left = expand(-1.0);
  if (out.rising_at_radius) {
    out.arg = fm >= g(right) ? m : right;
    out.value = std::max(fm, g(right));
    return out;
  }
  double a = std::min(left, right), b = std::max(left, right);

  // Golden section on [a, b]; track the best point seen.
  double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
  double f1 = g(x1), f2 = g(x2);
  double bx = m, bf = fm;
  for (int it = 0; it < 200; ++it) {
    if (f1 > bf) { bf = f1; bx = x1; }
    if (f2 > bf) { bf = f2; bx = x2; }
    if (b - a < 1e-13 * (1.0 + std::fabs(a) + std::fabs(b))) break;
    if (f1 < f2) {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = g(x2);
    } else {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = g(x1);
    }
  }
  out.arg = bx;
  out.value = bf;
  return out;
}

MaximizeResult maximize_concave_cyclic(
    const std::function<double(const std::vector<double>&)>& g,
    const std::vector<std::vector<double>>& starts,
    const std::vector<double>& lo, const std::vector<double>& hi,
    double tol, int max_sweeps, double probe_radius) {
  MaximizeResult best;
  best.value = -kInf;
  const std::size_t n = lo.size();
  for (const auto& s0 : starts) {
    std::vector<double> x = s0;
    double fx = g(x);
    bool rising = false;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
      const double before = fx;
      for (std::size_t c = 0; c < n; ++c) {
        auto slice = [&](double v) {
          std::vector<double> y = x;
          y[c] = v;
          return g(y);
        };
        const auto r = maximize_concave_1d(slice, lo[c], hi[c], x[c], tol * 0.1, probe_radius);
        if (r.rising_at_radius) rising = true;
        if (r.value > fx) {
          fx = r.value;
          x[c] = r.arg;
        }
      }
      if (rising) break;
      if (!(fx > before + tol)) { ++sweep; break; }
    }
    if (rising) {
      best.rising_at_radius = true;
      best.arg = x;
      best.value = kInf;
      best.sweeps = sweep;
      return best;
    }
    if (fx > best.value) {
      best.value = fx;
      best.arg = x;
      best.sweeps = sweep;
    }
  }
  return best;
}

}  // namespace ldp
