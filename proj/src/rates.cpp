#include "ldp/rates.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <set>
#include <stdexcept>

#include "ldp/optimize.hpp"
#include "ldp/util.hpp"

namespace ldp {

namespace {

struct DomainHit {
  double x;
};

double sup_zeta(const LambdaRV& rv, int dim) {
  double s = 0.0;
  if (dim == 1) {
    Vec u(1);
    u[0] = 1.0;
    s = std::max(rv.zeta(u), rv.zeta(-u));
  } else {
    // Coarse sphere sweep; enough for a truncation bound.
    for (int a = 0; a < 24; ++a) {
      const double ph = 2.0 * M_PI * a / 24.0;
      for (int b = 0; b < (dim == 3 ? 12 : 1); ++b) {
        const double th = dim == 3 ? M_PI * (b + 0.5) / 12.0 : M_PI_2;
        Vec u(dim);
        u[0] = std::sin(th) * std::cos(ph);
        u[1] = std::sin(th) * std::sin(ph);
        if (dim == 3) u[2] = std::cos(th);
        s = std::max(s, rv.zeta(u));
      }
    }
  }
  return s;
}

}  // namespace

PartitionLevels::PartitionLevels(std::vector<double> t, std::vector<Vec> l)
    : times(std::move(t)), levels(std::move(l)) {
  if (times.empty() || times.size() != levels.size())
    throw std::invalid_argument("partition: needs k >= 1 times with matching levels");
  double prev = 0.0;
  for (double ti : times) {
    if (!(ti > prev) || !(ti <= 1.0))
      throw std::invalid_argument("partition: times must satisfy 0 < t_1 < ... <= 1");
    prev = ti;
  }
  const auto d = levels[0].size();
  for (const auto& lv : levels)
    if (lv.size() != d) throw std::invalid_argument("partition: mixed level dimensions");
}

PiecewisePath::PiecewisePath(std::vector<double> s, std::vector<Vec> v)
    : knots(std::move(s)), values(std::move(v)) {
  if (knots.size() < 2 || knots.size() != values.size())
    throw std::invalid_argument("path: needs matching knots/values, m >= 1 segments");
  if (knots.front() != 0.0 || knots.back() != 1.0)
    throw std::invalid_argument("path: knots must span [0, 1]");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1])) throw std::invalid_argument("path: knots must increase");
}

PiecewiseConstFn PiecewiseConstFn::constant(const Vec& v, int m) {
  PiecewiseConstFn f;
  f.edges.resize(m + 1);
  for (int i = 0; i <= m; ++i) f.edges[i] = static_cast<double>(i) / m;
  f.edges.back() = 1.0;
  f.cell.assign(m, v);
  return f;
}

PiecewiseConstFn PiecewiseConstFn::from_path_derivative(const PiecewisePath& f) {
  PiecewiseConstFn d;
  d.edges = f.knots;
  d.cell.reserve(f.knots.size() - 1);
  for (std::size_t i = 1; i < f.knots.size(); ++i)
    d.cell.push_back((f.values[i] - f.values[i - 1]) / (f.knots[i] - f.knots[i - 1]));
  return d;
}

PiecewiseConstFn PiecewiseConstFn::refined(int m) const {
  std::set<double> e(edges.begin(), edges.end());
  for (int i = 1; i < m; ++i) e.insert(static_cast<double>(i) / m);
  PiecewiseConstFn out;
  out.edges.assign(e.begin(), e.end());
  out.cell.reserve(out.edges.size() - 1);
  std::size_t src = 0;
  for (std::size_t i = 0; i + 1 < out.edges.size(); ++i) {
    const double mid = 0.5 * (out.edges[i] + out.edges[i + 1]);
    while (src + 2 < edges.size() && edges[src + 1] < mid) ++src;
    out.cell.push_back(cell[src]);
  }
  return out;
}

ConvexLimitFn limit_from_noise(const NoiseModel& noise) {
  ConvexLimitFn g;
  g.dim = noise.dim();
  NoiseModel n = noise;
  g.value = [n](const Vec& u) { return n.logmgf(u); };
  g.conjugate = [n](const Vec& x) { return n.legendre(x); };
  g.domain_halfwidth = noise.domain_halfwidth();
  g.growth_pow = 2.0;
  switch (noise.kind()) {
    case NoiseKind::GaussianIso:
    case NoiseKind::GaussianFull: {
      Eigen::SelfAdjointEigenSolver<Mat> es(noise.covariance());
      g.growth_coef = 0.5 * es.eigenvalues().maxCoeff();
      g.small_radius = kInf;
      g.quadratic = noise.covariance();
      break;
    }
    case NoiseKind::Rademacher:
      g.growth_coef = 0.5;  // log cosh u <= u^2/2 everywhere
      g.small_radius = kInf;
      break;
    case NoiseKind::Laplace:
      // -log(1 - v) <= v/(1 - v) <= (4/3) v for v <= 1/4
      g.growth_coef = (4.0 / 3.0) * noise.scale() * noise.scale();
      g.small_radius = 0.5 / noise.scale();
      break;
    case NoiseKind::UniformSymmetric:
      g.growth_coef = noise.halfwidth() * noise.halfwidth() / 6.0;  // log sinhc(au) <= (au)^2/6
      g.small_radius = kInf;
      break;
  }
  return g;
}

ConvexLimitFn limit_from_sigma(const Mat& sigma) {
  ConvexLimitFn g;
  g.dim = static_cast<int>(sigma.rows());
  Mat s = sigma;
  g.value = [s](const Vec& u) { return 0.5 * u.dot(s * u); };
  Eigen::SelfAdjointEigenSolver<Mat> es(sigma);
  const Mat v = es.eigenvectors();
  const Vec d = es.eigenvalues();
  const double dmax = d.maxCoeff();
  g.conjugate = [v, d, dmax](const Vec& w) {
    // Pseudo-inverse quadratic: +inf off range(Sigma).
    double out = 0.0;
    const Vec wt = v.transpose() * w;
    for (int a = 0; a < d.size(); ++a) {
      if (d[a] <= 1e-12 * std::max(dmax, 1.0)) {
        if (std::fabs(wt[a]) > 1e-10 * (1.0 + w.norm())) return kInf;
      } else {
        out += 0.5 * wt[a] * wt[a] / d[a];
      }
    }
    return out;
  };
  g.growth_coef = 0.5 * std::max(dmax, 0.0);
  g.small_radius = kInf;
  g.quadratic = sigma;
  return g;
}

ConvexLimitFn limit_from_rv(const LambdaRV& rv, int dim) {
  ConvexLimitFn g;
  g.dim = dim;
  LambdaRV r = rv;
  g.value = [r](const Vec& u) { return lambda_h(r, u); };
  g.growth_pow = rv.beta;
  g.growth_coef = 1.05 * sup_zeta(rv, dim);
  g.small_radius = kInf;
  g.conjugate = [r, dim](const Vec& w) {
    auto obj = [&](const std::vector<double>& lam) {
      Vec v(dim);
      for (int j = 0; j < dim; ++j) v[j] = lam[j];
      return v.dot(w) - lambda_h(r, v);
    };
    std::vector<double> lo(dim, -kInf), hi(dim, kInf);
    std::vector<std::vector<double>> starts{std::vector<double>(dim, 0.0)};
    // Power growth beta > 1 keeps the objective coercive; radius generous.
    const auto res = maximize_concave_cyclic(obj, starts, lo, hi, 1e-10, 200,
                                             1e9);
    if (res.rising_at_radius) return kInf;
    return std::max(0.0, res.value);
  };
  return g;
}

Vec h_kernel(double alpha, double p, double q, const PartitionLevels& pl, double x) {
  if (!(alpha > 0.5 && alpha < 1.0))
    throw std::domain_error("h_kernel: alpha must be in (1/2, 1)");
  const double e = 1.0 - alpha;
  auto b = [&](double y) {
    return y >= 0.0 ? p * std::pow(y, e) : -q * std::pow(-y, e);
  };
  Vec h = Vec::Zero(pl.dim());
  for (int i = 0; i < pl.k(); ++i)
    h += pl.levels[i] * (b(x + pl.times[i]) - b(x + pl.t(i)));
  return h;
}

RateResult lambda_rl(const ConvexLimitFn& gamma, double alpha, double p, double q,
                     const PartitionLevels& pl, const QuadratureOptions& opt) {
  RateResult out;
  if (!(alpha > 0.5 && alpha <= 1.0))
    throw std::domain_error("lambda_rl: alpha must be in (1/2, 1]");
  if (alpha == 1.0) {
    double s = 0.0;
    for (int i = 0; i < pl.k(); ++i) {
      const double v = gamma.value(pl.levels[i]);
      if (v == kInf) {
        out.value = kInf;
        return out;
      }
      s += (pl.times[i] - pl.t(i)) * v;
    }
    out.value = s;
    return out;
  }

  const double tk = pl.times.back();
  double lam_weight = 0.0;  // sum |lambda_i| (t_i - t_{i-1})
  for (int i = 0; i < pl.k(); ++i)
    lam_weight += pl.levels[i].norm() * (pl.times[i] - pl.t(i));
  if (lam_weight == 0.0) return out;
  const double ch = (1.0 - alpha) * std::max(p, q) * lam_weight;

  boost::math::quadrature::tanh_sinh<double> integrator;
  auto f = [&](double x) {
    const double v = gamma.value(h_kernel(alpha, p, q, pl, x));
    if (v == kInf) throw DomainHit{x};
    return v;
  };
  auto panel = [&](double a, double b) {
    if (b <= a) return 0.0;
    return integrator.integrate(f, a, b, opt.panel_tol);
  };

  try {
    KahanSum total;
    // Core panels split at the kernel kinks {-t_k, ..., -t_1, 0}.
    std::vector<double> breaks{-tk};
    for (int i = pl.k() - 1; i >= 1; --i) breaks.push_back(-pl.times[i - 1] - 0.0);
    breaks.push_back(0.0);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
      total.add(panel(breaks[i], breaks[i + 1]));

    // Tails in geometric panels until the analytic bound clears tolerance.
    const double s = gamma.growth_pow;
    const bool integrable = alpha * s > 1.0;
    double dist = 1.0;
    total.add(panel(0.0, dist));
    total.add(panel(-tk - dist, -tk));
    for (;;) {
      double bound = kInf;
      if (integrable && ch * std::pow(dist, -alpha) <= gamma.small_radius)
        bound = 2.0 * gamma.growth_coef * std::pow(ch, s) * std::pow(dist, 1.0 - alpha * s) /
                (alpha * s - 1.0);
      const double tol = std::max(opt.abs_tol, opt.rel_tol * std::fabs(total.value()));
      if (bound <= tol) {
        out.tail_bound = bound;
        break;
      }
      if (dist >= opt.x_max_cap || !integrable) {
        out.tail_bound = bound;
        out.imprecise = true;
        break;
      }
      const double next = dist * 4.0;
      total.add(panel(dist, next));
      total.add(panel(-tk - next, -tk - dist));
      dist = next;
    }
    out.value = total.value();
  } catch (const DomainHit& hit) {
    out.value = kInf;
    out.domain_violation_x = hit.x;
  }
  return out;
}

RateResult lambda_rl(const NoiseModel& noise, double alpha, double p, double q,
                     const PartitionLevels& pl, const QuadratureOptions& opt) {
  return lambda_rl(limit_from_noise(noise), alpha, p, q, pl, opt);
}

double gaussian_sigma2(double alpha, double p, double q) {
  if (!(alpha > 0.5 && alpha < 1.0))
    throw std::domain_error("gaussian_sigma2: alpha must be in (1/2, 1)");
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double a = alpha;
  // I1 = int_0^inf x^-a (1+x)^-a dx, folded onto [0,1] by x -> 1/x.
  const double i1 = integrator.integrate(
                        [a](double x) { return std::pow(x, -a) * std::pow(1.0 + x, -a); }, 0.0,
                        1.0, 1e-12) +
                    integrator.integrate(
                        [a](double u) { return std::pow(u, 2.0 * a - 2.0) * std::pow(1.0 + u, -a); },
                        0.0, 1.0, 1e-12);
  // I2 = int_0^1 u^-a (1-u)^-a du, folded about 1/2 so the lone singular
  // endpoint sits at 0 where the quadrature resolves positions exactly.
  const double i2 = 2.0 * integrator.integrate(
      [a](double u) { return std::pow(u, -a) * std::pow(1.0 - u, -a); }, 0.0, 0.5, 1e-12);
  const double e = 1.0 - a;
  return e * e * ((p * p + q * q) * i1 + p * q * i2);
}

double quadratic_lambda_rl(const Mat& sigma, double alpha, double p, double q,
                           const PartitionLevels& pl) {
  const double s2 = gaussian_sigma2(alpha, p, q);
  std::vector<double> edges{0.0};
  edges.insert(edges.end(), pl.times.begin(), pl.times.end());
  const Eigen::MatrixXd g = riesz_gram(edges, 2.0 * alpha - 1.0);
  double acc = 0.0;
  for (int i = 0; i < pl.k(); ++i)
    for (int j = 0; j < pl.k(); ++j)
      acc += pl.levels[i].dot(sigma * pl.levels[j]) * g(i, j);
  return 0.5 * s2 * acc;
}

Eigen::MatrixXd riesz_gram(const std::vector<double>& edges, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::domain_error("riesz_gram: theta in (0,1)");
  const int m = static_cast<int>(edges.size()) - 1;
  const double c = 1.0 / ((1.0 - theta) * (2.0 - theta));
  auto k2 = [&](double u) { return c * std::pow(std::fabs(u), 2.0 - theta); };
  Eigen::MatrixXd g(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double a1 = edges[i], b1 = edges[i + 1];
      const double a2 = edges[j], b2 = edges[j + 1];
      const double v = k2(b1 - a2) - k2(b1 - b2) - k2(a1 - a2) + k2(a1 - b2);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

Vec riesz_apply(const Mat& sigma, double theta, const PiecewiseConstFn& psi, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("riesz_apply: t must be in [0,1]");
  const double c = 1.0 / (1.0 - theta);
  auto k1 = [&](double u) {
    return u >= 0.0 ? c * std::pow(u, 1.0 - theta) : -c * std::pow(-u, 1.0 - theta);
  };
  Vec acc = Vec::Zero(psi.dim());
  for (int i = 0; i < psi.cells(); ++i)
    acc += (k1(t - psi.edges[i]) - k1(t - psi.edges[i + 1])) * psi.cell[i];
  return sigma * acc;
}

GaussRateResult gaussian_rate_alpha(const Mat& sigma, double alpha, double p, double q,
                                    const PiecewiseConstFn& phi_or_h, GaussRateMode mode) {
  GaussRateResult out;
  const double theta = 2.0 * alpha - 1.0;
  const double s2 = gaussian_sigma2(alpha, p, q);
  const Eigen::MatrixXd g = riesz_gram(phi_or_h.edges, theta);
  const int m = phi_or_h.cells();
  const int d = phi_or_h.dim();

  if (mode == GaussRateMode::ClosedForm) {
    double acc = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        acc += phi_or_h.cell[i].dot(sigma * phi_or_h.cell[j]) * g(i, j);
    out.value = acc / (2.0 * s2);
    return out;
  }

  Eigen::SelfAdjointEigenSolver<Mat> es(sigma);
  const Mat v = es.eigenvectors();
  const Vec ev = es.eigenvalues();
  const double ev_max = std::max(ev.maxCoeff(), 0.0);

  out.maximizer = phi_or_h;
  for (auto& c : out.maximizer.cell) c = Vec::Zero(d);

  double value = 0.0;
  for (int a = 0; a < d; ++a) {
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) b[i] = phi_or_h.width(i) * v.col(a).dot(phi_or_h.cell[i]);
    if (ev[a] <= 1e-12 * std::max(ev_max, 1.0)) {
      // Kernel direction: any mass makes the sup infinite; this covers
      // phi taking values in Ker(Sigma) on a set of positive measure.
      for (int i = 0; i < m; ++i) {
        if (phi_or_h.width(i) > 0.0 &&
            std::fabs(b[i]) > 1e-10 * phi_or_h.width(i) * (1.0 + phi_or_h.cell[i].norm())) {
          out.infinite = true;
          out.value = kInf;
          return out;
        }
      }
      continue;
    }
    Eigen::MatrixXd lhs = (s2 * ev[a]) * g;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(lhs);
    Eigen::VectorXd x = ldlt.solve(b);
    if (ldlt.info() != Eigen::Success || !x.allFinite()) {
      lhs.diagonal().array() += 1e-12 * lhs.trace() / m;
      x = lhs.ldlt().solve(b);
      out.ridge_used = true;
    }
    value += 0.5 * b.dot(x);
    for (int i = 0; i < m; ++i) out.maximizer.cell[i] += x[i] * v.col(a);
  }
  out.value = value;
  return out;
}

double finite_dim_rate(const ConvexLimitFn& gamma, const std::vector<double>& times,
                       const std::vector<Vec>& increments) {
  if (times.empty() || times.size() != increments.size())
    throw std::invalid_argument("finite_dim_rate: times/increments mismatch");
  double prev = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double dt = times[i] - prev;
    if (!(dt > 0.0)) throw std::invalid_argument("finite_dim_rate: zero-length subinterval");
    prev = times[i];
    const double c = gamma.conjugate(increments[i] / dt);
    if (c == kInf) return kInf;
    acc += dt * c;
  }
  return acc;
}

RateResult gamma_alpha_star(const ConvexLimitFn& gamma, double alpha, double p, double q,
                            const PiecewiseConstFn& phi, int m) {
  RateResult out;
  if (!(alpha > 0.5 && alpha <= 1.0))
    throw std::domain_error("gamma_alpha_star: alpha must be in (1/2, 1]");

  if (alpha == 1.0) {
    double acc = 0.0;
    for (int i = 0; i < phi.cells(); ++i) {
      const double c = gamma.conjugate(phi.cell[i]);
      if (c == kInf) {
        out.value = kInf;
        return out;
      }
      acc += phi.width(i) * c;
    }
    out.value = acc;
    return out;
  }

  const PiecewiseConstFn grid = phi.refined(m);

  if (gamma.quadratic.has_value()) {
    const auto r =
        gaussian_rate_alpha(*gamma.quadratic, alpha, p, q, grid, GaussRateMode::Variational);
    out.value = r.infinite ? kInf : r.value;
    out.ridge_used = r.ridge_used;
    return out;
  }

  // Generic convex Gamma: coordinate ascent over the cell values of psi.
  const int cells = grid.cells();
  const int d = grid.dim();
  std::vector<double> times(grid.edges.begin() + 1, grid.edges.end());
  auto objective = [&](const std::vector<double>& x) {
    std::vector<Vec> levels(cells, Vec::Zero(d));
    double linear = 0.0;
    for (int i = 0; i < cells; ++i) {
      for (int j = 0; j < d; ++j) levels[i][j] = x[i * d + j];
      linear += grid.width(i) * levels[i].dot(grid.cell[i]);
    }
    const PartitionLevels pl(times, levels);
    const auto lr = lambda_rl(gamma, alpha, p, q, pl);
    if (lr.value == kInf) return -kInf;
    return linear - lr.value;
  };
  std::vector<double> lo(cells * d, -kInf), hi(cells * d, kInf);
  std::vector<std::vector<double>> starts;
  starts.emplace_back(cells * d, 0.0);
  std::vector<double> s1(cells * d);
  for (int i = 0; i < cells; ++i)
    for (int j = 0; j < d; ++j) s1[i * d + j] = grid.cell[i][j];
  starts.push_back(std::move(s1));
  const auto r = maximize_concave_cyclic(objective, starts, lo, hi, 1e-9, 60);
  if (r.rising_at_radius) {
    out.value = kInf;
    out.unbounded = true;
    return out;
  }
  out.value = std::max(0.0, r.value);
  return out;
}

RateResult conjugate_rl(const NoiseModel& noise, double alpha, double p, double q,
                        const std::vector<double>& times, const std::vector<Vec>& increments,
                        const QuadratureOptions& opt) {
  RateResult out;
  const ConvexLimitFn gamma = limit_from_noise(noise);
  if (alpha == 1.0) {
    out.value = finite_dim_rate(gamma, times, increments);
    return out;
  }
  const int k = static_cast<int>(times.size());
  const int d = noise.dim();
  if (times.empty() || increments.size() != times.size())
    throw std::invalid_argument("conjugate_rl: times/increments mismatch");

  auto objective = [&](const std::vector<double>& x) {
    std::vector<Vec> levels(k, Vec::Zero(d));
    double linear = 0.0;
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < d; ++j) levels[i][j] = x[i * d + j];
      linear += levels[i].dot(increments[i]);
    }
    const PartitionLevels pl(times, levels);
    const auto lr = lambda_rl(gamma, alpha, p, q, pl, opt);
    if (lr.value == kInf) return -kInf;
    return linear - lr.value;
  };

  // Gaussian-approximation start: maximizer of the quadratic model built on
  // the Riesz Gram and the noise covariance.
  std::vector<double> edges{0.0};
  edges.insert(edges.end(), times.begin(), times.end());
  const Eigen::MatrixXd g = riesz_gram(edges, 2.0 * alpha - 1.0);
  const double s2 = gaussian_sigma2(alpha, p, q);
  Eigen::MatrixXd quad(k * d, k * d);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          quad(i * d + a, j * d + b) = s2 * g(i, j) * noise.covariance()(a, b);
  Eigen::VectorXd w(k * d);
  for (int i = 0; i < k; ++i)
    for (int a = 0; a < d; ++a) w[i * d + a] = increments[i][a];
  Eigen::VectorXd lam0 = quad.ldlt().solve(w);
  if (!lam0.allFinite()) lam0.setZero();

  std::vector<std::vector<double>> starts;
  starts.emplace_back(k * d, 0.0);
  starts.emplace_back(lam0.data(), lam0.data() + k * d);
  std::vector<double> lo(k * d, -kInf), hi(k * d, kInf);
  const auto r = maximize_concave_cyclic(objective, starts, lo, hi, 1e-8, 200, 1e6);
  if (r.rising_at_radius) {
    out.value = kInf;
    out.unbounded = true;
    return out;
  }
  out.value = std::max(0.0, r.value);
  return out;
}

RateResult path_rate(const Scenario& s, const PiecewisePath& f, int m) {
  RateResult out;
  if (f.values[0].norm() != 0.0) {
    out.value = kInf;  // rate functions vanish off {f(0) = 0} by definition
    return out;
  }
  const PiecewiseConstFn phi = PiecewiseConstFn::from_path_derivative(f);
  std::vector<double> seg_times(f.knots.begin() + 1, f.knots.end());
  std::vector<Vec> seg_incr;
  for (std::size_t i = 1; i < f.knots.size(); ++i)
    seg_incr.push_back(f.values[i] - f.values[i - 1]);

  const double alpha = s.coeffs().alpha();
  const double p = s.coeffs().p(), q = s.coeffs().q();
  switch (s.tag()) {
    case ScenarioTag::S1:
    case ScenarioTag::S2:
      out.value = finite_dim_rate(limit_from_noise(s.noise()), seg_times, seg_incr);
      return out;
    case ScenarioTag::S3:
      out.value = finite_dim_rate(limit_from_sigma(s.noise().covariance()), seg_times, seg_incr);
      return out;
    case ScenarioTag::S4:
      out.value = finite_dim_rate(limit_from_rv(*s.rv(), s.noise().dim()), seg_times, seg_incr);
      return out;
    case ScenarioTag::R1:
    case ScenarioTag::R2:
      return gamma_alpha_star(limit_from_noise(s.noise()), alpha, p, q, phi, m);
    case ScenarioTag::R3:
      return gamma_alpha_star(limit_from_sigma(s.noise().covariance()), alpha, p, q, phi, m);
    case ScenarioTag::R4:
      return gamma_alpha_star(limit_from_rv(*s.rv(), s.noise().dim()), alpha, p, q, phi, m);
  }
  return out;
}

PiVerdict pi_membership(const NoiseModel& noise, const WindowSumTable& table,
                        const PartitionLevels& pl, long n_max, long j_max) {
  const CoefficientModel& coeffs = table.model();
  const bool r_scaling =
      coeffs.regime() == Regime::LongMemory && coeffs.alpha() < 1.0;
  const double pq_min = std::min(coeffs.p(), coeffs.q());

  // Exact domain conditions.
  for (int i = 0; i < pl.k(); ++i) {
    if (r_scaling) {
      const Vec scaled = pq_min * pl.levels[i];
      if (noise.domain_query(scaled) != DomainLocation::Interior)
        return {PiVerdictKind::DomainViolation, 0, 0,
                "(p^q) lambda_" + std::to_string(i + 1) + " not in the interior of F"};
    } else {
      if (noise.logmgf(pl.levels[i]) == kInf)
        return {PiVerdictKind::DomainViolation, 0, 0,
                "lambda_" + std::to_string(i + 1) + " outside F"};
    }
  }
  if (noise.domain_is_whole_space())
    return {PiVerdictKind::FeasibleUpTo, n_max, j_max, "F = R^d; every finite level is feasible"};

  if (j_max + n_max > table.radius())
    throw std::invalid_argument("pi_membership: scan needs radius >= n_max + j_max");

  // Exhaustive scan with an envelope prune per n: the windowed sums are
  // bounded by the absolute window over the whole scanned stretch, so a
  // finite log-MGF at the envelope clears the entire row.
  long worst_n = 0, worst_j = 0;
  double lam_sum = 0.0;
  for (const auto& l : pl.levels) lam_sum += l.template lpNorm<Eigen::Infinity>();
  double psi_n = 0.0;
  for (long n = 1; n <= n_max; ++n) {
    if (coeffs.regime() == Regime::LongMemory) psi_n += coeffs.psi(static_cast<double>(n));
    const double scale = coeffs.regime() == Regime::LongMemory ? 1.0 / psi_n : 1.0;
    std::vector<long> sizes(pl.k() + 1);
    sizes[0] = 0;
    for (int i = 1; i <= pl.k(); ++i)
      sizes[i] = static_cast<long>(pl.times[i - 1] * static_cast<double>(n));
    const double env = lam_sum * scale * table.abs_window_sum(-table.radius() - 1, 2 * table.radius() + 1);
    if (env < noise.domain_halfwidth()) continue;
    bool violated = false;
    long vj = 0;
    for (long j = -j_max; j <= j_max; ++j) {
      Vec arg = Vec::Zero(pl.dim());
      for (int i = 1; i <= pl.k(); ++i) {
        const double w = table.window_sum(j + sizes[i - 1], sizes[i] - sizes[i - 1]);
        arg += pl.levels[i - 1] * (w * scale);
      }
      if (noise.logmgf(arg) == kInf) {
        violated = true;
        vj = j;
        break;
      }
    }
    if (violated && n >= worst_n) {
      worst_n = n;
      worst_j = vj;
    }
  }
  if (worst_n > n_max / 2)
    return {PiVerdictKind::InfeasibleAt, worst_n, worst_j,
            "log-MGF infinite at the scanned window"};
  if (worst_n > 0)
    return {PiVerdictKind::FeasibleUpTo, n_max, j_max,
            "violations only below n_max/2 (finitely many excluded prefixes)"};
  return {PiVerdictKind::FeasibleUpTo, n_max, j_max, "no violation in the scanned range"};
}

}  // namespace ldp
