#pragma once

#include <functional>
#include <vector>

namespace ldp {

struct Maximize1Result {
  double arg = 0.0;
  double value = 0.0;
  /// The objective was still climbing at the probe radius; the supremum is
  /// taken to be +inf by the caller.
  bool rising_at_radius = false;
};

/// Maximizes a concave g on the open interval (lo, hi); g may return -inf
/// outside its effective domain. Bracket expansion is geometric from
/// `start`; if the value keeps increasing past `probe_radius` the result is
/// flagged instead of chased. `tol` is an absolute tolerance on the value.
Maximize1Result maximize_concave_1d(const std::function<double(double)>& g,
                                    double lo, double hi, double start,
                                    double tol, double probe_radius = 1e6);

struct MaximizeResult {
  std::vector<double> arg;
  double value = 0.0;
  bool rising_at_radius = false;
  int sweeps = 0;
};

/// Cyclic coordinate ascent for a concave objective on a box (coordinates of
/// lo/hi may be +-inf). Each coordinate is solved by the 1-d routine; sweeps
/// stop once a full pass improves the value by less than tol.
MaximizeResult maximize_concave_cyclic(
    const std::function<double(const std::vector<double>&)>& g,
    const std::vector<std::vector<double>>& starts,
    const std::vector<double>& lo, const std::vector<double>& hi,
    double tol, int max_sweeps = 200, double probe_radius = 1e6);

}  // namespace ldp
