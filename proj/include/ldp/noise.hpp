#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cstdint>
#include <json.hpp>
#include <vector>

#include "ldp/rng.hpp"
#include "ldp/util.hpp"

namespace ldp {

// Dimensions are capped at 3, so vectors/matrices live on the stack.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

enum class NoiseKind { GaussianIso, GaussianFull, Rademacher, Laplace, UniformSymmetric };

enum class DomainLocation { Interior, Boundary, Exterior };

class TiltedNoise;

/// Mean-zero innovation law on R^d (d <= 3): closed-form log-MGF, convex
/// conjugate, covariance, counter-addressed sampling and exponential tilting.
///
/// Log-MGFs:
///   GaussianIso(v)       1/2 v |l|^2
///   GaussianFull(S)      1/2 l'Sl
///   Rademacher           sum_j log cosh l_j
///   Laplace(s)           -sum_j log(1 - s^2 l_j^2),  finite iff max|s l_j| < 1
///   UniformSymmetric(a)  sum_j log(sinh(a l_j)/(a l_j))
class NoiseModel {
 public:
  static NoiseModel gaussian_iso(int dim, double variance);
  static NoiseModel gaussian_full(const Mat& sigma);
  static NoiseModel rademacher(int dim);
  static NoiseModel laplace(int dim, double scale);
  static NoiseModel uniform_symmetric(int dim, double halfwidth);

  /// {"kind": "...", "dim": d, "params": {...}}
  static NoiseModel from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  NoiseKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  const Mat& covariance() const noexcept { return cov_; }
  bool domain_is_whole_space() const noexcept { return domain_halfwidth_ == kInf; }
  /// Coordinatewise half-width of F; +inf when F = R^d.
  double domain_halfwidth() const noexcept { return domain_halfwidth_; }

  /// Lambda(lam); +inf exactly when lam is outside F. Throws
  /// std::invalid_argument on non-finite components.
  double logmgf(const Vec& lam) const;
  double logmgf1(double lam) const;  // d == 1 fast path, no validation

  DomainLocation domain_query(const Vec& lam) const;

  /// Fenchel-Legendre transform Lambda*(x) by concave maximization.
  /// Nonnegative; 0 at x = 0; +inf when the objective is still climbing at
  /// the probe radius. Default tol: 1e-8 (d=1), 1e-6 (d=2,3).
  double legendre(const Vec& x, double tol = -1.0) const;
  double legendre1(double x, double tol = 1e-8) const;

  /// grad Lambda(theta) by central differences, step 1e-6 (1 + |theta|).
  Vec grad_logmgf(const Vec& theta) const;

  /// Exponential tilt dP_theta ~ exp(theta.z) dP; theta must be in the
  /// interior of F (std::domain_error otherwise).
  TiltedNoise tilt(const Vec& theta) const;

  /// One i.i.d. draw addressed by (stream, index); variate `index` owns the
  /// uniform slots [2 d index, 2 d (index+1)).
  Vec draw(const CounterRng& rng, std::uint64_t stream, std::uint64_t index) const;
  double draw1(const CounterRng& rng, std::uint64_t stream, std::uint64_t index) const;

  /// d = 1 draw under the scalar tilt eta (eta = 0 gives the base law,
  /// bitwise). Used by the per-innovation importance sampler.
  double draw1_tilted(double eta, const CounterRng& rng, std::uint64_t stream,
                      std::uint64_t index) const;

  std::vector<Vec> sample(const CounterRng& rng, std::uint64_t stream, std::size_t count) const;

  double iso_variance() const noexcept { return param_; }
  double scale() const noexcept { return param_; }
  double halfwidth() const noexcept { return param_; }

 private:
  NoiseModel(NoiseKind k, int dim, double param);

  NoiseKind kind_;
  int dim_;
  double param_ = 0.0;     // variance / scale / halfwidth, by kind
  Mat cov_;
  Mat chol_;               // lower factor, GaussianFull only
  double domain_halfwidth_ = 0.0;
};

/// Sampler for the tilted law plus its likelihood-ratio bookkeeping.
class TiltedNoise {
 public:
  const Vec& theta() const noexcept { return theta_; }
  const Vec& mean() const noexcept { return mean_; }
  double logmgf_at_theta() const noexcept { return lmgf_; }

  /// log dP/dP_theta (z) = Lambda(theta) - theta.z, the importance log-weight.
  double log_weight(const Vec& z) const { return lmgf_ - theta_.dot(z); }
  double log_weight1(double z) const { return lmgf_ - theta_[0] * z; }

  Vec draw(const CounterRng& rng, std::uint64_t stream, std::uint64_t index) const;
  double draw1(const CounterRng& rng, std::uint64_t stream, std::uint64_t index) const;

  /// d = 1 draw under the scalar tilt eta (eta = 0 gives the base law,
  /// bitwise). Used by the per-innovation importance sampler.
  double draw1_tilted(double eta, const CounterRng& rng, std::uint64_t stream,
                      std::uint64_t index) const;

 private:
  friend class NoiseModel;
  TiltedNoise(const NoiseModel& base, Vec theta, Vec mean, double lmgf)
      : base_(base), theta_(std::move(theta)), mean_(std::move(mean)), lmgf_(lmgf) {}

  NoiseModel base_;
  Vec theta_;
  Vec mean_;
  double lmgf_;
};

}  // namespace ldp
