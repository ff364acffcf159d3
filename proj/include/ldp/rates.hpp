#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ldp/coefficients.hpp"
#include "ldp/noise.hpp"
#include "ldp/scaling.hpp"

namespace ldp {

/// Partition 0 < t_1 < ... < t_k <= 1 with level vectors in R^d.
struct PartitionLevels {
  std::vector<double> times;
  std::vector<Vec> levels;

  PartitionLevels(std::vector<double> t, std::vector<Vec> l);
  int k() const noexcept { return static_cast<int>(times.size()); }
  int dim() const noexcept { return static_cast<int>(levels[0].size()); }
  double t(int i) const noexcept { return i == 0 ? 0.0 : times[i - 1]; }  // t_0 = 0
};

/// Piecewise-linear path on [0,1] with f(0) = 0.
struct PiecewisePath {
  std::vector<double> knots;   // 0 = s_0 < ... < s_m = 1
  std::vector<Vec> values;     // f(s_j), values[0] = 0

  PiecewisePath(std::vector<double> s, std::vector<Vec> v);
  int dim() const noexcept { return static_cast<int>(values[0].size()); }
};

/// Piecewise-constant function on [0,1]: value cell[i] on (edges[i], edges[i+1]].
struct PiecewiseConstFn {
  std::vector<double> edges;
  std::vector<Vec> cell;

  static PiecewiseConstFn constant(const Vec& v, int m);
  static PiecewiseConstFn from_path_derivative(const PiecewisePath& f);
  int cells() const noexcept { return static_cast<int>(cell.size()); }
  int dim() const noexcept { return static_cast<int>(cell[0].size()); }
  double width(int i) const noexcept { return edges[i + 1] - edges[i]; }
  /// Refines the cell structure with a uniform m-grid overlay (values kept).
  PiecewiseConstFn refined(int m) const;
};

/// Convex integrand Gamma with Gamma(0) = 0, plus the growth data used for
/// tail truncation: Gamma(u) <= growth_coef |u|^growth_pow whenever
/// |u| <= small_radius, and coordinatewise domain half-width (inf if F = R^d).
struct ConvexLimitFn {
  std::function<double(const Vec&)> value;
  std::function<double(const Vec&)> conjugate;
  int dim = 1;
  double growth_pow = 2.0;
  double growth_coef = 0.5;
  double small_radius = kInf;
  double domain_halfwidth = kInf;
  std::optional<Mat> quadratic;  // set when Gamma(u) = u'Qu/2 exactly
};

ConvexLimitFn limit_from_noise(const NoiseModel& noise);
ConvexLimitFn limit_from_sigma(const Mat& sigma);
ConvexLimitFn limit_from_rv(const LambdaRV& rv, int dim);

struct QuadratureOptions {
  double rel_tol = 1e-6;    // tail bound target relative to |value|
  double abs_tol = 1e-12;
  double panel_tol = 1e-10;
  double x_max_cap = 1e12;
};

struct RateResult {
  double value = 0.0;
  double tail_bound = 0.0;
  bool imprecise = false;           // tail bound still above tolerance at the cap
  bool unbounded = false;           // conjugate objective rising at the probe radius
  bool ridge_used = false;          // Gram solve needed regularization
  std::optional<double> domain_violation_x;  // first x with Gamma(h(x)) = +inf
};

/// Kernel h_{t_1..t_k}(x; lambda), the limiting weighted increment profile;
/// closed-form antiderivative per sign region.
Vec h_kernel(double alpha, double p, double q, const PartitionLevels& pl, double x);

/// Integral transform of Gamma along the kernel:
///   alpha < 1: int Gamma(h(x; lambda)) dx over the real line,
///   alpha = 1: sum (t_i - t_{i-1}) Gamma(lambda_i).
/// Panels split at the kernel kinks; tails truncated with an analytic bound.
RateResult lambda_rl(const ConvexLimitFn& gamma, double alpha, double p, double q,
                     const PartitionLevels& pl, const QuadratureOptions& opt = {});
RateResult lambda_rl(const NoiseModel& noise, double alpha, double p, double q,
                     const PartitionLevels& pl, const QuadratureOptions& opt = {});

/// Exact value of the transform for quadratic Gamma(u) = u'Su/2 via the
/// Riesz-kernel Gram identity; used as the fast path and as a cross-check.
double quadratic_lambda_rl(const Mat& sigma, double alpha, double p, double q,
                           const PartitionLevels& pl);

/// Convex conjugate of the transform: sup over levels of
/// sum lambda_i.w_i - Lambda^rl(lambda), derivative-free coordinate ascent
/// restarted from 0 and from the Gaussian-approximation maximizer.
RateResult conjugate_rl(const NoiseModel& noise, double alpha, double p, double q,
                        const std::vector<double>& times, const std::vector<Vec>& increments,
                        const QuadratureOptions& opt = {});

/// sigma^2(alpha, p, q) = (1-alpha)^2 int |x+1|^-a |x|^-a (p/q weights) dx,
/// quadrature with splits at {-1, 0}; the 1/x substitution makes the tails
/// exact, no truncation.
double gaussian_sigma2(double alpha, double p, double q);

/// Gram matrix G_ij = int_cell_i int_cell_j |t-s|^-theta ds dt (closed form).
Eigen::MatrixXd riesz_gram(const std::vector<double>& edges, double theta);

/// T_theta psi(t) = int_0^1 Sigma psi(s) |t-s|^-theta ds, exact per cell.
Vec riesz_apply(const Mat& sigma, double theta, const PiecewiseConstFn& psi, double t);

enum class GaussRateMode { Variational, ClosedForm };

struct GaussRateResult {
  double value = 0.0;
  bool infinite = false;
  bool ridge_used = false;
  PiecewiseConstFn maximizer;  // Variational mode only
};

/// Long-memory Gaussian rate (G_Sigma)_alpha^*:
///   Variational: maximize (psi, phi) - (sigma^2/2)(psi, T_{2a-1} psi) over
///     piecewise-constant psi on phi's cells -- a concave quadratic solved on
///     the Riesz Gram matrix, per eigencomponent of Sigma.
///   ClosedForm: the argument is h with phi = T_{2a-1} h; returns
///     (1/(2 sigma^2)) (h, T_{2a-1} h).
/// Kernel components of phi on a set of positive measure give +inf.
GaussRateResult gaussian_rate_alpha(const Mat& sigma, double alpha, double p, double q,
                                    const PiecewiseConstFn& phi_or_h, GaussRateMode mode);

enum class LimitKind { LogMgf, GaussSigma, BalancedRv };

/// Finite-dimensional rate sum (t_i - t_{i-1}) (Lambda^v)*(w_i / (t_i - t_{i-1})).
/// GaussSigma uses the pseudo-inverse convention: +inf off range(Sigma).
double finite_dim_rate(const ConvexLimitFn& gamma, const std::vector<double>& times,
                       const std::vector<Vec>& increments);

/// Variational transform Gamma*_alpha(phi) restricted to piecewise-constant
/// psi on phi's grid refined by m cells; monotone nondecreasing in m.
/// alpha = 1 reduces to the cellwise conjugate integral.
RateResult gamma_alpha_star(const ConvexLimitFn& gamma, double alpha, double p, double q,
                            const PiecewiseConstFn& phi, int m);

/// Path rate function dispatch over the eight scenarios.
RateResult path_rate(const Scenario& s, const PiecewisePath& f, int m = 64);

enum class PiVerdictKind { FeasibleUpTo, InfeasibleAt, DomainViolation };

struct PiVerdict {
  PiVerdictKind kind;
  long n = 0;
  long j = 0;
  std::string detail;
};

/// Truncated feasibility check for the Pi sets: exact closed-form domain
/// conditions plus an exhaustive scan of the windowed-sum arguments for
/// n <= n_max, |j| <= j_max. Violations confined to n below n_max/2 are
/// treated as the finitely-many excluded prefixes the definition allows.
/// Explicitly a bounded verdict, never a proof of membership.
PiVerdict pi_membership(const NoiseModel& noise, const WindowSumTable& table,
                        const PartitionLevels& pl, long n_max, long j_max);

}  // namespace ldp
