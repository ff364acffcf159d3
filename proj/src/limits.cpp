#include "ldp/limits.hpp"

#include <cmath>
#include <stdexcept>

#include "ldp/util.hpp"

#include "ldp/rates.hpp"

namespace ldp {

PrelimitValue prelimit_sum(const NoiseModel& noise, const WindowSumTable& table,
                           const Scenario& s, const PartitionLevels& pl, long n, long a_n) {
  if (n < 1) throw std::invalid_argument("prelimit_sum: n must be >= 1");
  if (a_n < 2 * n) throw std::invalid_argument("prelimit_sum: needs A_n >= 2n");
  const int k = pl.k();
  const int d = pl.dim();
  std::vector<long> sizes(k + 1);
  sizes[0] = 0;
  for (int i = 1; i <= k; ++i)
    sizes[i] = static_cast<long>(pl.times[i - 1] * static_cast<double>(n));
  if (a_n + sizes[k] > table.radius())
    throw std::invalid_argument("prelimit_sum: windows exit the table; raise the radius A");

  const double b_n = s.speed(n);
  const double ratio = b_n / s.normalizer(n);

  PrelimitValue out;
  KahanSum acc;
  Vec arg(d);
  for (long l = -a_n; l <= a_n; ++l) {
    arg.setZero();
    for (int i = 1; i <= k; ++i) {
      const double w = table.window_sum(l + sizes[i - 1], sizes[i] - sizes[i - 1]);
      arg += pl.levels[i - 1] * (w * ratio);
    }
    const double v = d == 1 ? noise.logmgf1(arg[0]) : noise.logmgf(arg);
    if (v == kInf) {
      out.infinite = true;
      out.violating_index = l;
      out.value = kInf;
      return out;
    }
    acc.add(v);
  }
  out.value = acc.value() / b_n;

  // Truncation bound for the |l| > A_n remainder.
  const auto gamma = limit_from_noise(noise);
  double lam_abs = 0.0;
  for (const auto& l : pl.levels) lam_abs += l.norm();
  const double tail_sq = static_cast<double>(n) * static_cast<double>(n) *
                         table.model().tail_bound_sq(a_n - n);
  const double arg_peak = std::fabs(ratio) * lam_abs *
                          static_cast<double>(n) *
                          (table.model().regime() == Regime::LongMemory
                               ? table.model().psi(static_cast<double>(a_n - n))
                               : std::fabs(table.model().phi(std::min(a_n - n, table.radius()))));
  if (arg_peak <= gamma.small_radius)
    out.tail_bound = gamma.growth_coef * ratio * ratio * lam_abs * lam_abs * tail_sq / b_n;
  else
    out.tail_bound = kInf;
  return out;
}

double prelimit_limit(const NoiseModel& noise, const Scenario& s, const PartitionLevels& pl) {
  const double alpha = s.coeffs().alpha();
  const double p = s.coeffs().p(), q = s.coeffs().q();
  switch (s.tag()) {
    case ScenarioTag::S1:
    case ScenarioTag::S2: {
      double acc = 0.0;
      for (int i = 0; i < pl.k(); ++i)
        acc += (pl.times[i] - pl.t(i)) * noise.logmgf(pl.levels[i]);
      return acc;
    }
    case ScenarioTag::S3: {
      // Quadratic limit G_Sigma per increment block.
      double acc = 0.0;
      for (int i = 0; i < pl.k(); ++i)
        acc += (pl.times[i] - pl.t(i)) * 0.5 *
               pl.levels[i].dot(noise.covariance() * pl.levels[i]);
      return acc;
    }
    case ScenarioTag::S4: {
      double acc = 0.0;
      for (int i = 0; i < pl.k(); ++i)
        acc += (pl.times[i] - pl.t(i)) * lambda_h(*s.rv(), pl.levels[i]);
      return acc;
    }
    case ScenarioTag::R1:
    case ScenarioTag::R2:
      return lambda_rl(noise, alpha, p, q, pl).value;
    case ScenarioTag::R3:
      if (alpha < 1.0) return quadratic_lambda_rl(noise.covariance(), alpha, p, q, pl);
      return lambda_rl(limit_from_sigma(noise.covariance()), alpha, p, q, pl).value;
    case ScenarioTag::R4:
      return lambda_rl(limit_from_rv(*s.rv(), noise.dim()), alpha, p, q, pl).value;
  }
  return kNaN;
}

PrelimitReport convergence_report(const NoiseModel& noise, const WindowSumTable& table,
                                  const Scenario& s, const PartitionLevels& pl,
                                  const std::vector<long>& n_grid,
                                  std::optional<long> a_n_override) {
  PrelimitReport rep;
  rep.limit = prelimit_limit(noise, s, pl);
  for (long n : n_grid) {
    // The default truncation backs off to what the table can serve; an
    // explicit override is taken literally (and may throw).
    long a_n = a_n_override.value_or(default_a_n(n));
    if (!a_n_override) {
      const long nk = static_cast<long>(pl.times.back() * static_cast<double>(n));
      a_n = std::min(a_n, table.radius() - nk);
    }
    const auto v = prelimit_sum(noise, table, s, pl, n, a_n);
    ConvergenceRow row;
    row.n = n;
    row.prelimit = v.value;
    row.limit = rep.limit;
    row.rel_error = std::fabs(v.value - rep.limit) / std::max(1e-300, std::fabs(rep.limit));
    rep.rows.push_back(row);
  }
  // Fit |error| ~ n^{-c} on the last few points.
  std::vector<double> lx, ly;
  const std::size_t take = std::min<std::size_t>(4, rep.rows.size());
  for (std::size_t i = rep.rows.size() - take; i < rep.rows.size(); ++i) {
    if (rep.rows[i].rel_error <= 0.0) continue;
    lx.push_back(std::log(static_cast<double>(rep.rows[i].n)));
    ly.push_back(std::log(rep.rows[i].rel_error));
  }
  rep.fitted_exponent = lx.size() >= 2 ? -fit_line(lx, ly).slope : 0.0;
  return rep;
}

}  // namespace ldp
