#pragma once

#include <json.hpp>
#include <vector>

namespace ldp {

enum class Regime { ShortMemory, LongMemory };
enum class ShortKind { Geometric, FiniteSupport };
enum class SlowVarKind { None, LogPower };

/// Coefficient sequence phi_i materialized on [-A, A].
///
/// Short memory: generators normalized so the materialized sum is exactly 1.
/// Long memory: phi_0 = p, phi_i = p psi(i) and phi_{-i} = q psi(i) for
/// i >= 1, with psi(t) = t^{-alpha} L(t); L is 1 or log(max(t,e))^c.
class CoefficientModel {
 public:
  static CoefficientModel geometric(double rho, long radius);
  static CoefficientModel finite_support(std::vector<double> taps, long first_index, long radius);
  static CoefficientModel long_memory(double alpha, double p, long radius,
                                      SlowVarKind slow = SlowVarKind::None,
                                      double log_power = 1.0);

  /// {"regime": "short"|"long", ...}; see README for the full schema.
  static CoefficientModel from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  Regime regime() const noexcept { return regime_; }
  long radius() const noexcept { return radius_; }
  double alpha() const noexcept { return alpha_; }
  double p() const noexcept { return p_; }
  double q() const noexcept { return 1.0 - p_; }

  /// phi_i; throws std::out_of_range for |i| > radius.
  double phi(long i) const;

  /// psi(t) = t^{-alpha} L(t), long-memory regularly-varying envelope.
  double psi(double t) const;

  /// Psi_n = sum_{1<=i<=n} psi(i), compensated accumulation.
  /// Throws std::logic_error in the short-memory regime.
  double psi_partial(long n) const;

  /// Analytic bound on sum_{|i|>A} |phi_i| (short) resp. sum_{|i|>A} phi_i^2
  /// tail behavior diagnostics for truncation reporting.
  double tail_bound_abs(long a) const;
  double tail_bound_sq(long a) const;

 private:
  CoefficientModel() = default;

  Regime regime_ = Regime::ShortMemory;
  ShortKind short_kind_ = ShortKind::Geometric;
  double rho_ = 0.5;
  std::vector<double> taps_;
  long first_index_ = 0;
  double norm_ = 1.0;

  double alpha_ = 0.75;
  double p_ = 1.0;
  SlowVarKind slow_ = SlowVarKind::None;
  double log_power_ = 1.0;

  long radius_ = 0;
};

/// Regular-variation diagnostic: psi(n x)/psi(n) against x^{-alpha}.
struct RvRatioReport {
  double ratio;
  double target;
  double rel_error;
};
RvRatioReport rv_diagnostic(const CoefficientModel& m, double x, long n);

/// Prefix-sum tables for the windowed sums phi_{i,n} = phi_{i+1}+...+phi_{i+n}
/// and their absolute counterparts. O(1) per query after an O(A) build.
class WindowSumTable {
 public:
  explicit WindowSumTable(const CoefficientModel& m);

  long radius() const noexcept { return a_; }
  const CoefficientModel& model() const noexcept { return model_; }

  /// phi_{i,n}; throws std::out_of_range (with a hint to raise the radius)
  /// when the window [i+1, i+n] leaves the materialized range.
  double window_sum(long i, long n) const;
  double abs_window_sum(long i, long n) const;

  /// Window clipped to the materialized range; zero outside. Used for
  /// truncated-filter simulation where the clipping is the model.
  double clamped_window_sum(long i, long n) const;

  /// sum of phi_u over u in [a, b] intersected with the materialized range.
  double range_sum(long a, long b) const;

  /// sum_{|l| <= l_max} phi_{l,n}^2 over fully materialized windows.
  double sum_sq_windows(long n, long l_max) const;

 private:
  double prefix(long j) const noexcept { return pref_[static_cast<std::size_t>(j + a_ + 1)]; }
  double prefix_abs(long j) const noexcept { return pref_abs_[static_cast<std::size_t>(j + a_ + 1)]; }

  CoefficientModel model_;
  long a_;
  std::vector<double> pref_;      // pref_[j + A + 1] = sum_{u <= j} phi_u, pref_[0] = 0
  std::vector<double> pref_abs_;
};

}  // namespace ldp
