#pragma once

#include <functional>
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>

#include "ldp/coefficients.hpp"
#include "ldp/noise.hpp"
#include "ldp/util.hpp"

namespace ldp {

/// Balanced regular variation data of the log-MGF: Lambda(t u)/tau(t) ->
/// zeta(u) with tau regularly varying of exponent beta > 1.
struct LambdaRV {
  double beta;
  std::function<double(double)> tau;
  std::function<double(const Vec&)> zeta;  // on the unit sphere
};

/// RV data of an exactly quadratic log-MGF: tau(t) = t^2, zeta(u) = u'Su/2.
LambdaRV gaussian_lambda_rv(const Mat& sigma);

/// zeta(lam/|lam|) |lam|^beta, zero at lam = 0.
double lambda_h(const LambdaRV& rv, const Vec& lam);

struct RvFit {
  bool accepted = false;
  double beta = 0.0;
  std::string reason;
  LambdaRV rv;
};

/// Fits (beta, tau, zeta) from log Lambda(t u) over t in [1e2, 1e6] per
/// direction; rejects bounded domains, beta <= 1 + tol, or directional
/// exponent spread above 1%.
RvFit rv_of_lambda(const NoiseModel& noise);

enum class ScenarioTag { S1, S2, S3, S4, R1, R2, R3, R4 };

std::string to_string(ScenarioTag t);
ScenarioTag scenario_tag_from_string(const std::string& s);

/// One normalization/speed regime: the normalizers a_n, speeds b_n and the
/// implicit sequence gamma_n. S3/R3/S4/R4 take a_n = n^rho with the
/// admissible exponent window validated against the coefficient data.
class Scenario {
 public:
  static Scenario make(ScenarioTag tag, std::shared_ptr<const NoiseModel> noise,
                       std::shared_ptr<const CoefficientModel> coeffs,
                       double a_exponent = kNaN,
                       std::optional<LambdaRV> rv = std::nullopt);

  static Scenario from_json(const nlohmann::json& j, std::shared_ptr<const NoiseModel> noise,
                            std::shared_ptr<const CoefficientModel> coeffs);
  nlohmann::json to_json() const;

  ScenarioTag tag() const noexcept { return tag_; }
  const NoiseModel& noise() const noexcept { return *noise_; }
  const CoefficientModel& coeffs() const noexcept { return *coeffs_; }
  const std::optional<LambdaRV>& rv() const noexcept { return rv_; }
  double a_exponent() const noexcept { return a_exp_; }
  bool long_memory() const noexcept {
    return tag_ == ScenarioTag::R1 || tag_ == ScenarioTag::R2 || tag_ == ScenarioTag::R3 ||
           tag_ == ScenarioTag::R4;
  }

  double normalizer(long n) const;  // a_n
  double speed(long n) const;       // b_n

  /// gamma_n = sup{x : tau(x)/x <= a_n/n} (S4) resp. with tau(Psi_n x) (R4);
  /// bracketing bisection, exact to the double grid.
  double gamma(long n) const;

  double psi_partial(long n) const { return coeffs_->psi_partial(n); }

 private:
  Scenario() = default;

  ScenarioTag tag_;
  std::shared_ptr<const NoiseModel> noise_;
  std::shared_ptr<const CoefficientModel> coeffs_;
  double a_exp_ = kNaN;
  std::optional<LambdaRV> rv_;
};

}  // namespace ldp
