#include "ldp/noise.hpp"

#include <cmath>
#include <stdexcept>

#include "ldp/optimize.hpp"
#include "ldp/util.hpp"

namespace ldp {

namespace {

void check_dim(int d) {
  if (d < 1 || d > 3) throw std::invalid_argument("noise: dimension must be in {1,2,3}");
}

void check_finite(const Vec& v, const char* what) {
  for (int j = 0; j < v.size(); ++j)
    if (!std::isfinite(v[j])) throw std::invalid_argument(std::string(what) + ": non-finite component");
}

}  // namespace

NoiseModel::NoiseModel(NoiseKind k, int dim, double param)
    : kind_(k), dim_(dim), param_(param) {}

NoiseModel NoiseModel::gaussian_iso(int dim, double variance) {
  check_dim(dim);
  if (!(variance > 0)) throw std::invalid_argument("gaussian_iso: variance must be positive");
  NoiseModel m(NoiseKind::GaussianIso, dim, variance);
  m.cov_ = variance * Mat::Identity(dim, dim);
  m.domain_halfwidth_ = kInf;
  return m;
}

NoiseModel NoiseModel::gaussian_full(const Mat& sigma) {
  check_dim(static_cast<int>(sigma.rows()));
  if (sigma.rows() != sigma.cols() || !sigma.isApprox(sigma.transpose()))
    throw std::invalid_argument("gaussian_full: sigma must be symmetric");
  NoiseModel m(NoiseKind::GaussianFull, static_cast<int>(sigma.rows()), 0.0);
  m.cov_ = sigma;
  Eigen::LLT<Mat> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("gaussian_full: sigma must be positive definite");
  m.chol_ = llt.matrixL();
  m.domain_halfwidth_ = kInf;
  return m;
}

NoiseModel NoiseModel::rademacher(int dim) {
  check_dim(dim);
  NoiseModel m(NoiseKind::Rademacher, dim, 0.0);
  m.cov_ = Mat::Identity(dim, dim);
  m.domain_halfwidth_ = kInf;
  return m;
}

NoiseModel NoiseModel::laplace(int dim, double scale) {
  check_dim(dim);
  if (!(scale > 0)) throw std::invalid_argument("laplace: scale must be positive");
  NoiseModel m(NoiseKind::Laplace, dim, scale);
  m.cov_ = 2.0 * scale * scale * Mat::Identity(dim, dim);
  m.domain_halfwidth_ = 1.0 / scale;
  return m;
}

NoiseModel NoiseModel::uniform_symmetric(int dim, double halfwidth) {
  check_dim(dim);
  if (!(halfwidth > 0)) throw std::invalid_argument("uniform_symmetric: halfwidth must be positive");
  NoiseModel m(NoiseKind::UniformSymmetric, dim, halfwidth);
  m.cov_ = halfwidth * halfwidth / 3.0 * Mat::Identity(dim, dim);
  m.domain_halfwidth_ = kInf;
  return m;
}

NoiseModel NoiseModel::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const int dim = j.value("dim", 1);
  const auto params = j.value("params", nlohmann::json::object());
  if (kind == "gaussian_iso") return gaussian_iso(dim, params.value("variance", 1.0));
  if (kind == "gaussian_full") {
    const auto rows = params.at("sigma");
    Mat s(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) s(r, c) = rows.at(r).at(c).get<double>();
    return gaussian_full(s);
  }
  if (kind == "rademacher") return rademacher(dim);
  if (kind == "laplace") return laplace(dim, params.value("scale", 1.0));
  if (kind == "uniform_symmetric") return uniform_symmetric(dim, params.value("halfwidth", 1.0));
  throw std::invalid_argument("noise: unknown kind '" + kind + "'");
}

nlohmann::json NoiseModel::to_json() const {
  nlohmann::json j;
  j["dim"] = dim_;
  switch (kind_) {
    case NoiseKind::GaussianIso:
      j["kind"] = "gaussian_iso";
      j["params"] = {{"variance", param_}};
      break;
    case NoiseKind::GaussianFull: {
      j["kind"] = "gaussian_full";
      std::vector<std::vector<double>> rows(dim_, std::vector<double>(dim_));
      for (int r = 0; r < dim_; ++r)
        for (int c = 0; c < dim_; ++c) rows[r][c] = cov_(r, c);
      j["params"] = {{"sigma", rows}};
      break;
    }
    case NoiseKind::Rademacher:
      j["kind"] = "rademacher";
      j["params"] = nlohmann::json::object();
      break;
    case NoiseKind::Laplace:
      j["kind"] = "laplace";
      j["params"] = {{"scale", param_}};
      break;
    case NoiseKind::UniformSymmetric:
      j["kind"] = "uniform_symmetric";
      j["params"] = {{"halfwidth", param_}};
      break;
  }
  return j;
}

double NoiseModel::logmgf1(double lam) const {
  switch (kind_) {
    case NoiseKind::GaussianIso:
      return 0.5 * param_ * lam * lam;
    case NoiseKind::GaussianFull:
      return 0.5 * cov_(0, 0) * lam * lam;
    case NoiseKind::Rademacher:
      return log_cosh(lam);
    case NoiseKind::Laplace: {
      const double u = param_ * lam;
      if (std::fabs(u) >= 1.0) return kInf;
      return -std::log1p(-u * u);
    }
    case NoiseKind::UniformSymmetric:
      return log_sinhc(param_ * lam);
  }
  return kNaN;
}

double NoiseModel::logmgf(const Vec& lam) const {
  check_finite(lam, "logmgf");
  if (lam.size() != dim_) throw std::invalid_argument("logmgf: dimension mismatch");
  if (kind_ == NoiseKind::GaussianFull) return 0.5 * lam.dot(cov_ * lam);
  double s = 0.0;
  for (int j = 0; j < dim_; ++j) {
    s += logmgf1(lam[j]);
    if (s == kInf) return kInf;
  }
  return s;
}

DomainLocation NoiseModel::domain_query(const Vec& lam) const {
  check_finite(lam, "domain_query");
  if (domain_is_whole_space()) return DomainLocation::Interior;
  const double m = lam.cwiseAbs().maxCoeff();
  if (m < domain_halfwidth_) return DomainLocation::Interior;
  if (m == domain_halfwidth_) return DomainLocation::Boundary;
  return DomainLocation::Exterior;
}

double NoiseModel::legendre1(double x, double tol) const {
  const double hw = domain_halfwidth_;
  auto g = [&](double lam) { return lam * x - logmgf1(lam); };
  const auto r = maximize_concave_1d(g, -hw, hw, 0.0, tol);
  if (r.rising_at_radius) return kInf;
  return std::max(0.0, r.value);
}

double NoiseModel::legendre(const Vec& x, double tol) const {
  check_finite(x, "legendre");
  if (x.size() != dim_) throw std::invalid_argument("legendre: dimension mismatch");
  if (tol <= 0) tol = dim_ == 1 ? 1e-8 : 1e-6;
  if (dim_ == 1) return legendre1(x[0], tol);

  auto g = [&](const std::vector<double>& lam) {
    Vec v(dim_);
    for (int j = 0; j < dim_; ++j) v[j] = lam[j];
    return v.dot(x) - logmgf(v);
  };
  std::vector<double> lo(dim_, -domain_halfwidth_), hi(dim_, domain_halfwidth_);
  std::vector<std::vector<double>> starts;
  starts.emplace_back(dim_, 0.0);
  // Gaussian-approximation maximizer cov^{-1} x, clamped into the box.
  Vec gx = cov_.ldlt().solve(Eigen::MatrixXd(x));
  std::vector<double> s1(dim_);
  for (int j = 0; j < dim_; ++j)
    s1[j] = std::clamp(gx[j], -0.9 * domain_halfwidth_, 0.9 * domain_halfwidth_);
  starts.push_back(s1);
  const auto r = maximize_concave_cyclic(g, starts, lo, hi, tol);
  if (r.rising_at_radius) return kInf;
  return std::max(0.0, r.value);
}

Vec NoiseModel::grad_logmgf(const Vec& theta) const {
  check_finite(theta, "grad_logmgf");
  Vec g(dim_);
  for (int j = 0; j < dim_; ++j) {
    const double h = 1e-6 * (1.0 + std::fabs(theta[j]));
    Vec up = theta, dn = theta;
    up[j] += h;
    dn[j] -= h;
    g[j] = (logmgf(up) - logmgf(dn)) / (2.0 * h);
  }
  return g;
}

TiltedNoise NoiseModel::tilt(const Vec& theta) const {
  if (domain_query(theta) != DomainLocation::Interior)
    throw std::domain_error("tilt: theta must lie in the interior of the effective domain");
  return TiltedNoise(*this, theta, grad_logmgf(theta), logmgf(theta));
}

namespace {

// Shared scalar draw: `eta` is the tilt for this coordinate (0 = base law).
// Each coordinate consumes at most the two uniform slots it owns.
double draw_coord(NoiseKind kind, double param, double eta,
                  const CounterRng& rng, std::uint64_t stream, std::uint64_t slot0) {
  switch (kind) {
    case NoiseKind::GaussianIso: {
      const double sd = std::sqrt(param);
      return param * eta + sd * rng.normal(stream, slot0);
    }
    case NoiseKind::GaussianFull:
      return rng.normal(stream, slot0);  // caller applies chol and mean shift
    case NoiseKind::Rademacher: {
      const double p_minus = 1.0 / (1.0 + std::exp(2.0 * eta));
      return rng.uniform(stream, slot0) < p_minus ? -1.0 : 1.0;
    }
    case NoiseKind::Laplace: {
      const double s = param;
      const double p_minus = 0.5 * (1.0 - s * eta);
      const double u_side = rng.uniform(stream, slot0);
      const double u_mag = rng.uniform(stream, slot0 + 1);
      const double e = -std::log(u_mag);
      if (u_side < p_minus) return -e / (1.0 / s + eta);
      return e / (1.0 / s - eta);
    }
    case NoiseKind::UniformSymmetric: {
      const double a = param;
      const double u = rng.uniform(stream, slot0);
      if (std::fabs(eta * a) < 1e-9) return a * (2.0 * u - 1.0);
      return -a + std::log1p(u * std::expm1(2.0 * eta * a)) / eta;
    }
  }
  return kNaN;
}

// Coordinatewise kinds only; GaussianFull goes through the cached Cholesky.
Vec draw_vec(const NoiseModel& m, const Vec* theta, const CounterRng& rng,
             std::uint64_t stream, std::uint64_t index) {
  const int d = m.dim();
  const std::uint64_t base = 2ULL * static_cast<std::uint64_t>(d) * index;
  Vec z(d);
  for (int j = 0; j < d; ++j) {
    const double eta = theta ? (*theta)[j] : 0.0;
    z[j] = draw_coord(m.kind(), m.iso_variance(), eta, rng, stream, base + 2ULL * j);
  }
  return z;
}

}  // namespace

Vec NoiseModel::draw(const CounterRng& rng, std::uint64_t stream, std::uint64_t index) const {
  if (kind_ == NoiseKind::GaussianFull) {
    const std::uint64_t base = 2ULL * static_cast<std::uint64_t>(dim_) * index;
    Vec xi(dim_);
    for (int j = 0; j < dim_; ++j) xi[j] = rng.normal(stream, base + 2ULL * j);
    return chol_ * xi;
  }
  return draw_vec(*this, nullptr, rng, stream, index);
}

double NoiseModel::draw1(const CounterRng& rng, std::uint64_t stream, std::uint64_t index) const {
  return draw_coord(kind_, param_, 0.0, rng, stream, 2ULL * index)
         * (kind_ == NoiseKind::GaussianFull ? chol_(0, 0) : 1.0);
}

double NoiseModel::draw1_tilted(double eta, const CounterRng& rng, std::uint64_t stream,
                                std::uint64_t index) const {
  if (kind_ == NoiseKind::GaussianFull)
    return cov_(0, 0) * eta + chol_(0, 0) * rng.normal(stream, 2ULL * index);
  return draw_coord(kind_, param_, eta, rng, stream, 2ULL * index);
}

std::vector<Vec> NoiseModel::sample(const CounterRng& rng, std::uint64_t stream,
                                    std::size_t count) const {
  std::vector<Vec> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(draw(rng, stream, i));
  return out;
}

Vec TiltedNoise::draw(const CounterRng& rng, std::uint64_t stream, std::uint64_t index) const {
  if (base_.kind() == NoiseKind::GaussianFull) {
    Vec xi = base_.draw(rng, stream, index);
    return xi + base_.covariance() * theta_;
  }
  return draw_vec(base_, &theta_, rng, stream, index);
}

double TiltedNoise::draw1(const CounterRng& rng, std::uint64_t stream, std::uint64_t index) const {
  if (base_.kind() == NoiseKind::GaussianFull)
    return base_.draw1(rng, stream, index) + base_.covariance()(0, 0) * theta_[0];
  return draw_coord(base_.kind(), base_.iso_variance(), theta_[0], rng, stream, 2ULL * index);
}

}  // namespace ldp
