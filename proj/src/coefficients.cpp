#include "ldp/coefficients.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ldp/util.hpp"

namespace ldp {

CoefficientModel CoefficientModel::geometric(double rho, long radius) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("geometric: rho must be in (0,1)");
  if (radius < 1) throw std::invalid_argument("geometric: radius must be >= 1");
  CoefficientModel m;
  m.regime_ = Regime::ShortMemory;
  m.short_kind_ = ShortKind::Geometric;
  m.rho_ = rho;
  m.radius_ = radius;
  // Normalize over the materialized range so the sum is exactly 1.
  const double tail_sum = rho * (1.0 - std::pow(rho, static_cast<double>(radius))) / (1.0 - rho);
  m.norm_ = 1.0 / (1.0 + 2.0 * tail_sum);
  return m;
}

CoefficientModel CoefficientModel::finite_support(std::vector<double> taps, long first_index,
                                                  long radius) {
  if (taps.empty()) throw std::invalid_argument("finite_support: empty taps");
  double s = 0.0;
  for (double t : taps) s += t;
  if (s == 0.0) throw std::invalid_argument("finite_support: taps must have nonzero sum");
  if (first_index < -radius || first_index + static_cast<long>(taps.size()) - 1 > radius)
    throw std::invalid_argument("finite_support: taps outside radius");
  CoefficientModel m;
  m.regime_ = Regime::ShortMemory;
  m.short_kind_ = ShortKind::FiniteSupport;
  m.taps_ = std::move(taps);
  m.first_index_ = first_index;
  m.norm_ = 1.0 / s;
  m.radius_ = radius;
  return m;
}

CoefficientModel CoefficientModel::long_memory(double alpha, double p, long radius,
                                               SlowVarKind slow, double log_power) {
  if (!(alpha > 0.5 && alpha <= 1.0))
    throw std::invalid_argument("long_memory: alpha must be in (1/2, 1]");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("long_memory: p must be in [0,1]");
  if (radius < 1) throw std::invalid_argument("long_memory: radius must be >= 1");
  CoefficientModel m;
  m.regime_ = Regime::LongMemory;
  m.alpha_ = alpha;
  m.p_ = p;
  m.slow_ = slow;
  m.log_power_ = log_power;
  m.radius_ = radius;
  return m;
}

CoefficientModel CoefficientModel::from_json(const nlohmann::json& j) {
  const std::string regime = j.at("regime").get<std::string>();
  const long radius = j.value("A", 1L << 16);
  if (regime == "long") {
    SlowVarKind slow = SlowVarKind::None;
    double c = 1.0;
    if (j.contains("slow_var") && !j["slow_var"].is_null()) {
      slow = SlowVarKind::LogPower;
      c = j["slow_var"].value("log_power", 1.0);
    }
    return long_memory(j.at("alpha").get<double>(), j.value("p", 1.0), radius, slow, c);
  }
  if (regime == "short") {
    const std::string gen = j.value("generator", "geometric");
    if (gen == "geometric") return geometric(j.value("rho", 0.5), radius);
    if (gen == "finite_support")
      return finite_support(j.at("taps").get<std::vector<double>>(), j.value("first_index", 0L),
                            radius);
    throw std::invalid_argument("coefficients: unknown generator '" + gen + "'");
  }
  throw std::invalid_argument("coefficients: regime must be 'short' or 'long'");
}

nlohmann::json CoefficientModel::to_json() const {
  nlohmann::json j;
  j["A"] = radius_;
  if (regime_ == Regime::LongMemory) {
    j["regime"] = "long";
    j["alpha"] = alpha_;
    j["p"] = p_;
    if (slow_ == SlowVarKind::LogPower) j["slow_var"] = {{"log_power", log_power_}};
  } else {
    j["regime"] = "short";
    if (short_kind_ == ShortKind::Geometric) {
      j["generator"] = "geometric";
      j["rho"] = rho_;
    } else {
      j["generator"] = "finite_support";
      j["taps"] = taps_;
      j["first_index"] = first_index_;
    }
  }
  return j;
}

double CoefficientModel::psi(double t) const {
  double l = 1.0;
  if (slow_ == SlowVarKind::LogPower)
    l = std::pow(std::log(std::max(t, 2.718281828459045)), log_power_);
  return std::pow(t, -alpha_) * l;
}

double CoefficientModel::phi(long i) const {
  if (i < -radius_ || i > radius_)
    throw std::out_of_range("phi: index " + std::to_string(i) + " outside radius " +
                            std::to_string(radius_));
  if (regime_ == Regime::LongMemory) {
    if (i == 0) return p_;
    if (i > 0) return p_ * psi(static_cast<double>(i));
    return (1.0 - p_) * psi(static_cast<double>(-i));
  }
  if (short_kind_ == ShortKind::Geometric)
    return norm_ * std::pow(rho_, static_cast<double>(std::labs(i)));
  const long k = i - first_index_;
  if (k < 0 || k >= static_cast<long>(taps_.size())) return 0.0;
  return norm_ * taps_[static_cast<std::size_t>(k)];
}

double CoefficientModel::psi_partial(long n) const {
  if (regime_ != Regime::LongMemory)
    throw std::logic_error("psi_partial: long-memory regime required");
  if (n < 1) throw std::invalid_argument("psi_partial: n must be >= 1");
  KahanSum s;
  for (long i = 1; i <= n; ++i) s.add(psi(static_cast<double>(i)));
  return s.value();
}

double CoefficientModel::tail_bound_abs(long a) const {
  if (regime_ == Regime::ShortMemory) {
    if (short_kind_ == ShortKind::FiniteSupport) return 0.0;
    return 2.0 * norm_ * std::pow(rho_, static_cast<double>(a + 1)) / (1.0 - rho_);
  }
  return kInf;  // long-memory coefficients are not absolutely summable
}

double CoefficientModel::tail_bound_sq(long a) const {
  if (regime_ == Regime::ShortMemory) {
    if (short_kind_ == ShortKind::FiniteSupport) return 0.0;
    const double t = norm_ * std::pow(rho_, static_cast<double>(a + 1));
    return 2.0 * t * t / (1.0 - rho_ * rho_);
  }
  // sum_{i>a} psi(i)^2 ~ a psi(a)^2 / (2 alpha - 1); 20% slack covers L.
  const double pa = psi(static_cast<double>(a));
  return 1.2 * 2.0 * static_cast<double>(a) * pa * pa / (2.0 * alpha_ - 1.0);
}

RvRatioReport rv_diagnostic(const CoefficientModel& m, double x, long n) {
  RvRatioReport r;
  r.ratio = m.psi(static_cast<double>(n) * x) / m.psi(static_cast<double>(n));
  r.target = std::pow(x, -m.alpha());
  r.rel_error = std::fabs(r.ratio - r.target) / r.target;
  return r;
}

WindowSumTable::WindowSumTable(const CoefficientModel& m) : model_(m), a_(m.radius()) {
  const std::size_t len = static_cast<std::size_t>(2 * a_ + 2);
  pref_.resize(len);
  pref_abs_.resize(len);
  pref_[0] = 0.0;
  pref_abs_[0] = 0.0;
  KahanSum s, sa;
  for (long j = -a_; j <= a_; ++j) {
    const double v = model_.phi(j);
    s.add(v);
    sa.add(std::fabs(v));
    pref_[static_cast<std::size_t>(j + a_ + 1)] = s.value();
    pref_abs_[static_cast<std::size_t>(j + a_ + 1)] = sa.value();
  }
}

double WindowSumTable::window_sum(long i, long n) const {
  if (n < 0) throw std::invalid_argument("window_sum: n must be >= 0");
  if (n == 0) return 0.0;
  if (i + 1 < -a_ || i + n > a_)
    throw std::out_of_range("window_sum: window [" + std::to_string(i + 1) + ", " +
                            std::to_string(i + n) + "] exits the materialized range [-A, A]; "
                            "raise the coefficient radius A (currently " + std::to_string(a_) + ")");
  return prefix(i + n) - prefix(i);
}

double WindowSumTable::abs_window_sum(long i, long n) const {
  if (n < 0) throw std::invalid_argument("abs_window_sum: n must be >= 0");
  if (n == 0) return 0.0;
  if (i + 1 < -a_ || i + n > a_)
    throw std::out_of_range("abs_window_sum: window exits the materialized range; raise A");
  return prefix_abs(i + n) - prefix_abs(i);
}

double WindowSumTable::range_sum(long a, long b) const {
  const long lo = std::max(a - 1, -a_ - 1);
  const long hi = std::min(b, a_);
  if (hi <= lo) return 0.0;
  return prefix(hi) - prefix(lo);
}

double WindowSumTable::clamped_window_sum(long i, long n) const {
  const long lo = std::max(i, -a_ - 1);
  const long hi = std::min(i + n, a_);
  if (hi <= lo) return 0.0;
  return prefix(hi) - prefix(lo);
}

double WindowSumTable::sum_sq_windows(long n, long l_max) const {
  KahanSum s;
  const long lo = std::max(-l_max, -a_ - 1);
  const long hi = std::min(l_max, a_ - n);
  for (long l = lo; l <= hi; ++l) {
    const double w = prefix(l + n) - prefix(l);
    s.add(w * w);
  }
  return s.value();
}

}  // namespace ldp
