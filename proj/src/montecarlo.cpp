#include "ldp/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ldp/util.hpp"

namespace ldp {

namespace {

constexpr long kChunk = 4096;

/// Innovation weights of the truncated-filter partial sum:
///   S_n = sum_j w_j Z_j,  w_j = sum_{k=1..n, |k-j| <= M} phi_{k-j},
/// j running over [1-M, n+M]. Index 0 of the returned vector is j = 1-M.
std::vector<double> innovation_weights(const SimConfig& cfg) {
  const long n = cfg.n, m = cfg.m_trunc;
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(n + 2 * m));
  for (long j = 1 - m; j <= n + m; ++j)
    w.push_back(cfg.table->range_sum(std::max(1 - j, -m), std::min(n - j, m)));
  return w;
}

double wilson_half(double p_hat, double r, double z) {
  return z * std::sqrt(p_hat * (1.0 - p_hat) / r + z * z / (4.0 * r * r)) / (1.0 + z * z / r);
}

double wilson_center(double p_hat, double r, double z) {
  return (p_hat + z * z / (2.0 * r)) / (1.0 + z * z / r);
}

double logmgf_derivative(const NoiseModel& noise, double u) {
  const double h = 1e-6 * (1.0 + std::fabs(u));
  return (noise.logmgf1(u + h) - noise.logmgf1(u - h)) / (2.0 * h);
}

}  // namespace

void SimConfig::validate() const {
  if (!noise || !table || !scenario) throw std::invalid_argument("sim: missing model refs");
  if (noise->dim() != 1) throw std::invalid_argument("sim: d = 1 required");
  if (n < 1) throw std::invalid_argument("sim: n >= 1 required");
  if (m_trunc < 1 || m_trunc > table->radius())
    throw std::invalid_argument("sim: truncation M must be in [1, A]");
  if (replications < 1) throw std::invalid_argument("sim: R >= 1 required");
}

PathSample simulate_path(const SimConfig& cfg, long replicate, int grid_points) {
  cfg.validate();
  const long n = cfg.n, m = cfg.m_trunc;
  const CounterRng rng(cfg.seed);
  const auto stream = static_cast<std::uint64_t>(replicate);

  // Draw the innovation block once, then build X by windowed convolution.
  std::vector<double> z(static_cast<std::size_t>(n + 2 * m));
  for (long j = 1 - m; j <= n + m; ++j)
    z[static_cast<std::size_t>(j - (1 - m))] = cfg.noise->draw1(rng, stream, j - (1 - m));

  std::vector<double> partial(static_cast<std::size_t>(n + 1), 0.0);
  KahanSum acc;
  for (long k = 1; k <= n; ++k) {
    double xk = 0.0;
    for (long i = -m; i <= m; ++i) {
      const long j = k - i;
      if (j < 1 - m || j > n + m) continue;
      xk += cfg.table->model().phi(i) * z[static_cast<std::size_t>(j - (1 - m))];
    }
    acc.add(xk);
    partial[static_cast<std::size_t>(k)] = acc.value();
  }

  const double a_n = cfg.scenario->normalizer(n);
  PathSample out;
  out.t.resize(grid_points);
  out.step.resize(grid_points);
  out.polygonal.resize(grid_points);
  for (int g = 0; g < grid_points; ++g) {
    const double t = static_cast<double>(g) / (grid_points - 1);
    const double nt = t * static_cast<double>(n);
    const long fl = std::min(static_cast<long>(nt), n);
    out.t[g] = t;
    out.step[g] = partial[static_cast<std::size_t>(fl)] / a_n;
    double poly = partial[static_cast<std::size_t>(fl)];
    if (fl < n) poly += (nt - static_cast<double>(fl)) *
                        (partial[static_cast<std::size_t>(fl + 1)] - partial[static_cast<std::size_t>(fl)]);
    out.polygonal[g] = poly / a_n;
  }
  return out;
}

double simulate_partial_sum(const SimConfig& cfg, long replicate) {
  cfg.validate();
  const auto w = innovation_weights(cfg);
  const CounterRng rng(cfg.seed);
  KahanSum s;
  for (std::size_t idx = 0; idx < w.size(); ++idx)
    s.add(w[idx] * cfg.noise->draw1(rng, static_cast<std::uint64_t>(replicate), idx));
  return s.value();
}

TailEstimate exact_gaussian_tail(const WindowSumTable& table, const Scenario& s, long n,
                                 double x) {
  if (s.noise().kind() != NoiseKind::GaussianIso && s.noise().kind() != NoiseKind::GaussianFull)
    throw std::domain_error("exact_gaussian_tail: oracle unavailable for non-Gaussian noise");
  if (s.noise().dim() != 1) throw std::domain_error("exact_gaussian_tail: d = 1 required");
  const double noise_var = s.noise().covariance()(0, 0);
  const long l_max = table.radius();
  const double v_n = noise_var * table.sum_sq_windows(n, l_max);
  // Windows beyond the materialized range: |phi_{l,n}| <= n sup_{|u|>A-n}|phi_u|.
  const double tail = noise_var * static_cast<double>(n) * static_cast<double>(n) *
                      table.model().tail_bound_sq(std::max(1L, l_max - n));

  TailEstimate est;
  est.method = "exact-gaussian";
  est.variance = v_n;
  est.tail_bound = tail;
  const double z = x * s.normalizer(n) / std::sqrt(v_n);
  est.log_estimate = log_gauss_upper_tail(z);
  est.estimate = std::exp(est.log_estimate);
  est.ci_lo = est.estimate;
  est.ci_hi = est.estimate;
  est.effective_sample_size = kInf;
  return est;
}

TailEstimate exact_gaussian_tail_truncated(const SimConfig& cfg, double x) {
  cfg.validate();
  if (cfg.noise->kind() != NoiseKind::GaussianIso && cfg.noise->kind() != NoiseKind::GaussianFull)
    throw std::domain_error("exact_gaussian_tail: oracle unavailable for non-Gaussian noise");
  const auto w = innovation_weights(cfg);
  const double noise_var = cfg.noise->covariance()(0, 0);
  KahanSum ss;
  for (double wi : w) ss.add(wi * wi);
  const double v_n = noise_var * ss.value();

  TailEstimate est;
  est.method = "exact-gaussian";
  est.variance = v_n;
  const double z = x * cfg.scenario->normalizer(cfg.n) / std::sqrt(v_n);
  est.log_estimate = log_gauss_upper_tail(z);
  est.estimate = std::exp(est.log_estimate);
  est.ci_lo = est.estimate;
  est.ci_hi = est.estimate;
  est.effective_sample_size = kInf;
  return est;
}

TailEstimate estimate_tail(const SimConfig& cfg, double x, TailMethod method) {
  cfg.validate();
  const auto w = innovation_weights(cfg);
  const double a_n = cfg.scenario->normalizer(cfg.n);
  const double threshold = x * a_n;
  const long r_total = cfg.replications;
  const long n_chunks = (r_total + kChunk - 1) / kChunk;
  const CounterRng rng(cfg.seed);

  TailEstimate est;

  if (method == TailMethod::Direct) {
    std::vector<long> hits(static_cast<std::size_t>(n_chunks), 0);
    parallel_for_chunks(static_cast<std::size_t>(n_chunks), cfg.threads, [&](std::size_t c) {
      const long lo = static_cast<long>(c) * kChunk;
      const long hi = std::min(lo + kChunk, r_total);
      long h = 0;
      for (long rep = lo; rep < hi; ++rep) {
        KahanSum s;
        for (std::size_t idx = 0; idx < w.size(); ++idx)
          s.add(w[idx] * cfg.noise->draw1(rng, static_cast<std::uint64_t>(rep), idx));
        if (s.value() > threshold) ++h;
      }
      hits[c] = h;
    });
    long total = 0;
    for (long h : hits) total += h;
    const double p_hat = static_cast<double>(total) / static_cast<double>(r_total);
    const double z95 = 1.959963984540054;
    est.method = "direct";
    est.estimate = p_hat;
    est.log_estimate = p_hat > 0 ? std::log(p_hat) : -kInf;
    const double c0 = wilson_center(p_hat, static_cast<double>(r_total), z95);
    const double hw = wilson_half(p_hat, static_cast<double>(r_total), z95);
    est.ci_lo = std::max(0.0, c0 - hw);
    est.ci_hi = std::min(1.0, c0 + hw);
    est.effective_sample_size = static_cast<double>(r_total);
    return est;
  }

  // Tilted: per-innovation tilt eta_l = theta w_l; theta either pinned or
  // solved so the tilted mean of S_n equals the threshold.
  double theta;
  if (cfg.tilt_theta) {
    theta = *cfg.tilt_theta;
  } else {
    auto tilted_mean = [&](double th) {
      KahanSum m;
      for (double wi : w) m.add(wi * logmgf_derivative(*cfg.noise, th * wi));
      return m.value();
    };
    double w_abs_max = 0.0;
    for (double wi : w) w_abs_max = std::max(w_abs_max, std::fabs(wi));
    const double hw_dom = cfg.noise->domain_halfwidth();
    const double theta_cap = hw_dom == kInf ? kInf : 0.999999 * hw_dom / w_abs_max;
    double lo = 0.0, hi = std::min(1.0, theta_cap * 0.5);
    if (!(hi > 0)) throw std::domain_error("estimate_tail: tilt infeasible");
    int grow = 0;
    while (tilted_mean(hi) < threshold) {
      lo = hi;
      hi = theta_cap == kInf ? hi * 2.0 : 0.5 * (hi + theta_cap);
      if (++grow > 200 || !(hi > lo))
        throw std::domain_error("estimate_tail: tilt infeasible, target mean unreachable");
    }
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (tilted_mean(mid) < threshold)
        lo = mid;
      else
        hi = mid;
    }
    theta = 0.5 * (lo + hi);
  }
  // Domain check on every tilted argument.
  for (double wi : w)
    if (cfg.noise->logmgf1(theta * wi) == kInf)
      throw std::domain_error("estimate_tail: tilt pushes an argument outside the domain");

  KahanSum lmgf_sum;
  for (double wi : w) lmgf_sum.add(cfg.noise->logmgf1(theta * wi));
  const double log_norm = lmgf_sum.value();  // sum_l Lambda(theta w_l)

  struct ChunkStat {
    double sum_y = 0.0, sum_y2 = 0.0;   // y = weight * indicator
    double sum_w = 0.0, sum_w2 = 0.0;   // all likelihood ratios
  };
  std::vector<ChunkStat> stats(static_cast<std::size_t>(n_chunks));
  parallel_for_chunks(static_cast<std::size_t>(n_chunks), cfg.threads, [&](std::size_t c) {
    const long lo_r = static_cast<long>(c) * kChunk;
    const long hi_r = std::min(lo_r + kChunk, r_total);
    ChunkStat st;
    for (long rep = lo_r; rep < hi_r; ++rep) {
      KahanSum s;
      for (std::size_t idx = 0; idx < w.size(); ++idx)
        s.add(w[idx] *
              cfg.noise->draw1_tilted(theta * w[idx], rng, static_cast<std::uint64_t>(rep), idx));
      const double sn = s.value();
      const double lw = log_norm - theta * sn;
      const double weight = std::exp(lw);
      st.sum_w += weight;
      st.sum_w2 += weight * weight;
      if (sn > threshold) {
        st.sum_y += weight;
        st.sum_y2 += weight * weight;
      }
    }
    stats[c] = st;
  });
  KahanSum sy, sy2, sw, sw2;
  for (const auto& st : stats) {
    sy.add(st.sum_y);
    sy2.add(st.sum_y2);
    sw.add(st.sum_w);
    sw2.add(st.sum_w2);
  }
  const double r_d = static_cast<double>(r_total);
  const double mean = sy.value() / r_d;
  const double var = std::max(0.0, sy2.value() / r_d - mean * mean);
  const double se = std::sqrt(var / r_d);
  est.method = "tilted";
  est.tilt_theta = theta;
  est.estimate = mean;
  est.log_estimate = mean > 0 ? std::log(mean) : -kInf;
  est.ci_lo = std::max(0.0, mean - 1.959963984540054 * se);
  est.ci_hi = std::min(1.0, mean + 1.959963984540054 * se);
  // Effective replicate count of the estimator terms y = w 1{event}; the
  // all-weight version collapses under any useful tilt and says nothing
  // about the event estimate.
  est.effective_sample_size = sy2.value() > 0 ? sy.value() * sy.value() / sy2.value() : 0.0;
  (void)sw;
  (void)sw2;
  return est;
}

SpeedScan speed_scan(const SimConfig& cfg, const std::vector<long>& n_grid, double x) {
  SpeedScan scan;
  const bool exact = cfg.noise->kind() == NoiseKind::GaussianIso ||
                     cfg.noise->kind() == NoiseKind::GaussianFull;
  for (long n : n_grid) {
    SimConfig c = cfg;
    c.n = n;
    SpeedRow row;
    row.n = n;
    if (exact) {
      const auto est = exact_gaussian_tail(*cfg.table, *cfg.scenario, n, x);
      row.neg_log_p = -est.log_estimate;
    } else {
      const auto est = estimate_tail(c, x, TailMethod::Tilted);
      row.neg_log_p = -est.log_estimate;
    }
    row.b_n = cfg.scenario->speed(n);
    row.ratio = row.neg_log_p / row.b_n;
    scan.rows.push_back(row);
  }
  std::vector<double> lx, ly;
  for (const auto& r : scan.rows) {
    lx.push_back(std::log(static_cast<double>(r.n)));
    ly.push_back(std::log(r.neg_log_p));
  }
  if (lx.size() >= 2) scan.fitted_slope = fit_line(lx, ly).slope;
  return scan;
}

}  // namespace ldp
