#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ldp/limits.hpp"
#include "ldp/rates.hpp"
#include "ldp/rng.hpp"

namespace ldp {

/// Simulation setup for the moving-average partial sums. The filter is
/// truncated at |i| <= M (the simulated model); the coefficient table must
/// materialize at least that radius. d = 1 only.
struct SimConfig {
  const NoiseModel* noise = nullptr;
  const WindowSumTable* table = nullptr;
  const Scenario* scenario = nullptr;
  long n = 0;
  long m_trunc = 0;      // innovation index range |i| <= M
  long replications = 0;
  std::optional<double> tilt_theta;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

struct PathSample {
  std::vector<double> t;
  std::vector<double> step;       // Y_n(t)
  std::vector<double> polygonal;  // tilde Y_n(t)
};

/// One replicate of the step and polygonal paths on a uniform grid of
/// `grid_points` times; deterministic in (seed, replicate).
PathSample simulate_path(const SimConfig& cfg, long replicate, int grid_points = 129);

/// Partial sum S_n of one replicate (the marginal functional used by the
/// tail estimators).
double simulate_partial_sum(const SimConfig& cfg, long replicate);

struct TailEstimate {
  double estimate = 0.0;
  double log_estimate = -kInf;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double effective_sample_size = 0.0;
  std::string method;   // "direct" | "tilted" | "exact-gaussian"
  double variance = 0.0;      // exact mode: Var(S_n) of the evaluated model
  double tail_bound = 0.0;    // exact mode: window truncation bound
  double tilt_theta = 0.0;    // tilted mode
};

/// P(S_n/a_n > x) for Gaussian innovations, no sampling: S_n is Gaussian
/// with variance sum_l phi_{l,n}^2 over the materialized windows; evaluated
/// in log space. Throws std::domain_error for non-Gaussian noise.
TailEstimate exact_gaussian_tail(const WindowSumTable& table, const Scenario& s, long n,
                                 double x);

/// Same law as the truncated-filter simulation (oracle for estimator tests).
TailEstimate exact_gaussian_tail_truncated(const SimConfig& cfg, double x);

enum class TailMethod { Direct, Tilted };

/// Monte Carlo estimate of P(S_n/a_n > x). Direct: empirical frequency with
/// a Wilson interval. Tilted: every innovation Z_{-l} is tilted by
/// theta phi_{l,n} with theta solved so the tilted mean of S_n/a_n is x
/// (unless cfg.tilt_theta pins it); unbiased likelihood-ratio estimate with
/// a delta-method interval. Replicates run in fixed chunks, so results are
/// identical for every thread count.
TailEstimate estimate_tail(const SimConfig& cfg, double x, TailMethod method);

struct SpeedRow {
  long n;
  double neg_log_p;
  double b_n;
  double ratio;  // -log P / b_n
};

struct SpeedScan {
  std::vector<SpeedRow> rows;
  double fitted_slope = 0.0;  // slope of log(-log P) vs log n over the grid
};

/// -log P(S_n/a_n > x) across an n-grid, exact-Gaussian mode when the noise
/// is Gaussian, tilted Monte Carlo otherwise.
SpeedScan speed_scan(const SimConfig& cfg, const std::vector<long>& n_grid, double x);

}  // namespace ldp
