#include "ldp/scaling.hpp"

#include <cmath>
#include <stdexcept>

#include "ldp/util.hpp"

namespace ldp {

LambdaRV gaussian_lambda_rv(const Mat& sigma) {
  LambdaRV rv;
  rv.beta = 2.0;
  rv.tau = [](double t) { return t * t; };
  Mat s = sigma;
  rv.zeta = [s](const Vec& u) { return 0.5 * u.dot(s * u); };
  return rv;
}

double lambda_h(const LambdaRV& rv, const Vec& lam) {
  const double r = lam.norm();
  if (r == 0.0) return 0.0;
  return rv.zeta(lam / r) * std::pow(r, rv.beta);
}

RvFit rv_of_lambda(const NoiseModel& noise) {
  RvFit fit;
  if (!noise.domain_is_whole_space()) {
    fit.reason = "effective domain is bounded; Lambda is not regularly varying at infinity";
    return fit;
  }
  // Directions: +-e_j plus diagonals for d > 1.
  std::vector<Vec> dirs;
  const int d = noise.dim();
  for (int j = 0; j < d; ++j) {
    Vec u = Vec::Zero(d);
    u[j] = 1.0;
    dirs.push_back(u);
    dirs.push_back(-u);
  }
  if (d > 1) {
    Vec u = Vec::Ones(d);
    dirs.push_back(u / u.norm());
  }

  // Slope of log Lambda(t u) vs log t, least squares over t in [1e2, 1e6],
  // repeated on [1e6, 1e10]: a genuine power keeps the same exponent while
  // linear-with-log-correction growth drifts toward 1.
  auto slope_over = [&](const Vec& u, double t0, double t1, bool& ok) {
    std::vector<double> logt, logv;
    for (double t = t0; t <= 1.0000001 * t1; t *= 10.0) {
      const double v = noise.logmgf(t * u);
      if (!std::isfinite(v) || v <= 0.0) {
        ok = false;
        return 0.0;
      }
      logt.push_back(std::log(t));
      logv.push_back(std::log(v));
    }
    ok = true;
    return fit_line(logt, logv).slope;
  };
  std::vector<double> betas;
  for (const auto& u : dirs) {
    bool ok = true;
    const double b1 = slope_over(u, 1e2, 1e6, ok);
    if (!ok) {
      fit.reason = "log-MGF not positive along a probe ray";
      return fit;
    }
    const double b2 = slope_over(u, 1e6, 1e10, ok);
    if (!ok) {
      fit.reason = "log-MGF not positive along a probe ray";
      return fit;
    }
    if (std::fabs(b1 - b2) > 0.01 * std::max(std::fabs(b2), 1.0)) {
      fit.reason = "exponent estimate drifts across decades; not regularly varying with beta > 1";
      fit.beta = b2;
      return fit;
    }
    betas.push_back(b2);
  }
  double bmin = betas[0], bmax = betas[0];
  for (double b : betas) {
    bmin = std::min(bmin, b);
    bmax = std::max(bmax, b);
  }
  const double beta = 0.5 * (bmin + bmax);
  if ((bmax - bmin) > 0.01 * std::fabs(beta)) {
    fit.reason = "directional exponent fits disagree by more than 1%";
    return fit;
  }
  if (beta <= 1.0 + 1e-3) {
    fit.reason = "fitted exponent beta <= 1";
    fit.beta = beta;
    return fit;
  }

  fit.accepted = true;
  fit.beta = beta;
  fit.rv.beta = beta;
  fit.rv.tau = [beta](double t) { return std::pow(t, beta); };
  NoiseModel probe = noise;
  const double t_ref = 1e6;
  fit.rv.zeta = [probe, beta, t_ref](const Vec& u) {
    return probe.logmgf(t_ref * u) / std::pow(t_ref, beta);
  };
  return fit;
}

std::string to_string(ScenarioTag t) {
  switch (t) {
    case ScenarioTag::S1: return "S1";
    case ScenarioTag::S2: return "S2";
    case ScenarioTag::S3: return "S3";
    case ScenarioTag::S4: return "S4";
    case ScenarioTag::R1: return "R1";
    case ScenarioTag::R2: return "R2";
    case ScenarioTag::R3: return "R3";
    case ScenarioTag::R4: return "R4";
  }
  return "?";
}

ScenarioTag scenario_tag_from_string(const std::string& s) {
  if (s == "S1") return ScenarioTag::S1;
  if (s == "S2") return ScenarioTag::S2;
  if (s == "S3") return ScenarioTag::S3;
  if (s == "S4") return ScenarioTag::S4;
  if (s == "R1") return ScenarioTag::R1;
  if (s == "R2") return ScenarioTag::R2;
  if (s == "R3") return ScenarioTag::R3;
  if (s == "R4") return ScenarioTag::R4;
  throw std::invalid_argument("scenario: unknown tag '" + s + "'");
}

Scenario Scenario::make(ScenarioTag tag, std::shared_ptr<const NoiseModel> noise,
                        std::shared_ptr<const CoefficientModel> coeffs, double a_exponent,
                        std::optional<LambdaRV> rv) {
  if (!noise || !coeffs) throw std::invalid_argument("scenario: noise and coeffs required");
  Scenario s;
  s.tag_ = tag;
  s.noise_ = std::move(noise);
  s.coeffs_ = std::move(coeffs);
  s.a_exp_ = a_exponent;
  s.rv_ = std::move(rv);

  const bool is_long = s.long_memory();
  if (is_long && s.coeffs_->regime() != Regime::LongMemory)
    throw std::invalid_argument("scenario: R tags need a long-memory coefficient model");
  if (!is_long && s.coeffs_->regime() != Regime::ShortMemory)
    throw std::invalid_argument("scenario: S tags need a short-memory coefficient model");

  const double alpha = s.coeffs_->alpha();
  switch (tag) {
    case ScenarioTag::S1:
    case ScenarioTag::R1:
      break;  // 0 in the interior of F holds for every supported law
    case ScenarioTag::S2:
    case ScenarioTag::R2:
      if (!s.noise_->domain_is_whole_space())
        throw std::invalid_argument("scenario: " + to_string(tag) +
                                    " requires F_Lambda = R^d");
      break;
    case ScenarioTag::S3:
      if (!(a_exponent > 0.5 && a_exponent < 1.0))
        throw std::invalid_argument("scenario: S3 needs a_n = n^rho with rho in (1/2, 1)");
      break;
    case ScenarioTag::R3:
      // sqrt(n) Psi_n << n^rho << n Psi_n, i.e. rho in (3/2 - alpha, 2 - alpha)
      // up to slow variation; checked numerically below.
      if (!(a_exponent > 1.5 - alpha && a_exponent < 2.0 - alpha))
        throw std::invalid_argument("scenario: R3 exponent outside the admissible window (" +
                                    std::to_string(1.5 - alpha) + ", " +
                                    std::to_string(2.0 - alpha) + ")");
      {
        // a_n / (sqrt(n) Psi_n) must climb and a_n / (n Psi_n) must fall.
        double prev_lo = 0.0, prev_hi = kInf;
        for (long n = 1L << 10; n <= (1L << 18); n <<= 4) {
          const double a_n = std::pow(static_cast<double>(n), a_exponent);
          const double psi_n = s.coeffs_->psi_partial(n);
          const double r_lo = a_n / (std::sqrt(static_cast<double>(n)) * psi_n);
          const double r_hi = a_n / (static_cast<double>(n) * psi_n);
          if (!(r_lo > prev_lo) || !(r_hi < prev_hi))
            throw std::invalid_argument("scenario: R3 window check failed at n=" +
                                        std::to_string(n));
          prev_lo = r_lo;
          prev_hi = r_hi;
        }
      }
      break;
    case ScenarioTag::S4:
      if (!(a_exponent > 1.0))
        throw std::invalid_argument("scenario: S4 needs a_n = n^rho with rho > 1");
      if (!s.rv_) throw std::invalid_argument("scenario: S4 requires the Lambda RV data");
      break;
    case ScenarioTag::R4:
      if (!(a_exponent > 2.0 - alpha))
        throw std::invalid_argument("scenario: R4 needs a_n = n^rho with rho > 2 - alpha");
      if (!s.rv_) throw std::invalid_argument("scenario: R4 requires the Lambda RV data");
      break;
  }
  return s;
}

Scenario Scenario::from_json(const nlohmann::json& j, std::shared_ptr<const NoiseModel> noise,
                             std::shared_ptr<const CoefficientModel> coeffs) {
  const auto tag = scenario_tag_from_string(j.at("tag").get<std::string>());
  const double a_exp = j.value("a_exponent", kNaN);
  std::optional<LambdaRV> rv;
  if (tag == ScenarioTag::S4 || tag == ScenarioTag::R4) {
    if (j.value("rv", std::string("fit")) == "gaussian")
      rv = gaussian_lambda_rv(noise->covariance());
    else {
      auto fit = rv_of_lambda(*noise);
      if (!fit.accepted)
        throw std::invalid_argument("scenario: log-MGF RV fit rejected: " + fit.reason);
      rv = fit.rv;
    }
  }
  return make(tag, std::move(noise), std::move(coeffs), a_exp, std::move(rv));
}

nlohmann::json Scenario::to_json() const {
  nlohmann::json j;
  j["tag"] = to_string(tag_);
  if (std::isfinite(a_exp_)) j["a_exponent"] = a_exp_;
  return j;
}

double Scenario::normalizer(long n) const {
  if (n < 1) throw std::invalid_argument("normalizer: n must be >= 1");
  const double nd = static_cast<double>(n);
  switch (tag_) {
    case ScenarioTag::S1:
    case ScenarioTag::S2:
      return nd;
    case ScenarioTag::R1:
    case ScenarioTag::R2:
      return nd * coeffs_->psi_partial(n);
    case ScenarioTag::S3:
    case ScenarioTag::S4:
    case ScenarioTag::R3:
    case ScenarioTag::R4:
      return std::pow(nd, a_exp_);
  }
  return kNaN;
}

double Scenario::gamma(long n) const {
  if (tag_ != ScenarioTag::S4 && tag_ != ScenarioTag::R4)
    throw std::logic_error("gamma: defined only for S4/R4");
  const double ratio = normalizer(n) / static_cast<double>(n);
  const double psi_n = tag_ == ScenarioTag::R4 ? coeffs_->psi_partial(n) : 1.0;
  const auto& tau = rv_->tau;
  auto crit = [&](double x) { return tau(psi_n * x) / x; };

  // tau(x)/x is eventually increasing (beta > 1); grow a bracket from [1, 4].
  double lo = 1.0, hi = 4.0;
  double prev = crit(lo);
  int probes = 0;
  while (crit(hi) <= ratio) {
    const double c = crit(hi);
    if (c < prev && ++probes > 8)
      throw std::runtime_error("gamma: tau(x)/x keeps decreasing; beta > 1 premise violated");
    prev = c;
    lo = hi;
    hi *= 4.0;
    if (hi > 1e300) throw std::runtime_error("gamma: bracket blow-up");
  }
  while (crit(lo) > ratio) {
    hi = lo;
    lo *= 0.25;
    if (lo < 1e-300) throw std::runtime_error("gamma: bracket collapse");
  }
  // Bisect to the double grid.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (crit(mid) <= ratio)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

double Scenario::speed(long n) const {
  if (n < 1) throw std::invalid_argument("speed: n must be >= 1");
  const double nd = static_cast<double>(n);
  switch (tag_) {
    case ScenarioTag::S1:
    case ScenarioTag::S2:
    case ScenarioTag::R1:
    case ScenarioTag::R2:
      return nd;
    case ScenarioTag::S3:
      return normalizer(n) * normalizer(n) / nd;
    case ScenarioTag::R3: {
      const double a = normalizer(n);
      const double psi_n = coeffs_->psi_partial(n);
      return a * a / (nd * psi_n * psi_n);
    }
    case ScenarioTag::S4:
      return nd * rv_->tau(gamma(n));
    case ScenarioTag::R4:
      return nd * rv_->tau(coeffs_->psi_partial(n) * gamma(n));
  }
  return kNaN;
}

}  // namespace ldp
