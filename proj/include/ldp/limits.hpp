#pragma once

#include <optional>
#include <vector>

#include "ldp/rates.hpp"

namespace ldp {

struct PrelimitValue {
  double value = 0.0;
  bool infinite = false;
  long violating_index = 0;  // first l with an argument outside F
  /// Bound on the discarded |l| > A_n mass: Cauchy-Schwarz turns the window
  /// tail into n^2 sum_{|i| > A_n - n} phi_i^2, paired with the quadratic
  /// envelope of Lambda near 0.
  double tail_bound = 0.0;
};

/// Truncated prelimit sum
///   (1/b_n) sum_{|l| <= A_n} Lambda((b_n/a_n) sum_i lambda_i phi_{l+[n t_{i-1}], [n t_i]-[n t_{i-1}]})
/// with (a_n, b_n) supplied by the scenario. O(A_n k) via the prefix table.
/// Requires A_n >= 2n and windows inside the materialized range.
PrelimitValue prelimit_sum(const NoiseModel& noise, const WindowSumTable& table,
                           const Scenario& s, const PartitionLevels& pl, long n, long a_n);

/// Default truncation rule for the prelimit sums.
inline long default_a_n(long n) { return std::max(4 * n, 1L << 16); }

struct ConvergenceRow {
  long n;
  double prelimit;
  double limit;
  double rel_error;
};

struct PrelimitReport {
  std::vector<ConvergenceRow> rows;
  double limit = 0.0;
  /// |error| ~ n^{-c} fitted on the last (up to) 4 grid points; diagnostic only.
  double fitted_exponent = 0.0;
};

/// The scenario's finite-n sums against the limit the corresponding rate
/// operation computes (sum/integral per scenario family).
PrelimitReport convergence_report(const NoiseModel& noise, const WindowSumTable& table,
                                  const Scenario& s, const PartitionLevels& pl,
                                  const std::vector<long>& n_grid,
                                  std::optional<long> a_n_override = std::nullopt);

/// The limit value alone (per the scenario dispatch).
double prelimit_limit(const NoiseModel& noise, const Scenario& s, const PartitionLevels& pl);

}  // namespace ldp
