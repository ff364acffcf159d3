#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "ldp/limits.hpp"

using namespace ldp;

namespace {

Vec v1(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

constexpr double kSigma2_75 = 0.32775719428651498;

struct Fixture {
  std::shared_ptr<NoiseModel> gauss = std::make_shared<NoiseModel>(NoiseModel::gaussian_iso(1, 1.0));
};

}  // namespace

TEST_CASE("prelimit: zero levels give zero") {
  Fixture f;
  auto geo = std::make_shared<CoefficientModel>(CoefficientModel::geometric(0.5, 1 << 16));
  const WindowSumTable table(*geo);
  const auto s = Scenario::make(ScenarioTag::S1, f.gauss, geo);
  const auto v = prelimit_sum(*f.gauss, table, s, PartitionLevels({1.0}, {v1(0.0)}), 1 << 10,
                              1 << 13);
  CHECK(v.value == 0.0);
  CHECK(!v.infinite);
}

TEST_CASE("prelimit S1: short-memory block limit") {
  Fixture f;
  auto geo = std::make_shared<CoefficientModel>(CoefficientModel::geometric(0.5, 1 << 16));
  const WindowSumTable table(*geo);
  const auto s = Scenario::make(ScenarioTag::S1, f.gauss, geo);
  const PartitionLevels pl({1.0}, {v1(1.0)});
  const auto v = prelimit_sum(*f.gauss, table, s, pl, 1 << 12, 1 << 14);
  CHECK(std::fabs(v.value - 0.5) / 0.5 < 0.02);
  CHECK(prelimit_limit(*f.gauss, s, pl) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("prelimit R1: long-memory integral limit with decreasing errors") {
  Fixture f;
  auto lm = std::make_shared<CoefficientModel>(CoefficientModel::long_memory(0.75, 1.0, 1 << 18));
  const WindowSumTable table(*lm);
  const auto s = Scenario::make(ScenarioTag::R1, f.gauss, lm);
  const PartitionLevels pl({1.0}, {v1(1.0)});
  const auto rep = convergence_report(*f.gauss, table, s, pl, {1 << 9, 1 << 11, 1 << 13},
                                      1L << 16);
  // Limit = Lambda^rl_1(1) = sigma^2 (8/3) / 2 for unit-variance noise.
  CHECK(rep.limit == doctest::Approx(4.0 * kSigma2_75 / 3.0).epsilon(1e-4));
  CHECK(rep.rows[0].rel_error > rep.rows[1].rel_error);
  CHECK(rep.rows[1].rel_error > rep.rows[2].rel_error);
  // Convergence is slow (the Psi_n correction is ~ n^{alpha-1}); at n = 2^13
  // the prelimit still sits several percent above the limit.
  CHECK(rep.rows[2].rel_error < 0.10);
  CHECK(rep.fitted_exponent > 0.1);
}

TEST_CASE("prelimit R3: quadratic-noise identity with the coefficient sum") {
  Fixture f;
  auto lm = std::make_shared<CoefficientModel>(CoefficientModel::long_memory(0.75, 1.0, 1 << 16));
  const WindowSumTable table(*lm);
  const auto s = Scenario::make(ScenarioTag::R3, f.gauss, lm, 1.0);
  const long n = 1 << 10;
  const long a_n = 1 << 13;
  const double lam = 1.4;
  const auto v = prelimit_sum(*f.gauss, table, s, PartitionLevels({1.0}, {v1(lam)}), n, a_n);
  // For quadratic Lambda the prelimit is exactly
  //   lam^2/2 sum_{|l|<=A_n} phi_{l,n}^2 / (n Psi_n^2)  (independent of a_n).
  const double psi_n = lm->psi_partial(n);
  const double direct = 0.5 * lam * lam * table.sum_sq_windows(n, a_n) /
                        (static_cast<double>(n) * psi_n * psi_n);
  CHECK(v.value == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("prelimit S4: huge-deviation limit via the RV data") {
  Fixture f;
  auto geo = std::make_shared<CoefficientModel>(CoefficientModel::geometric(0.5, 1 << 16));
  const WindowSumTable table(*geo);
  const auto s = Scenario::make(ScenarioTag::S4, f.gauss, geo, 1.25,
                                gaussian_lambda_rv(Mat::Identity(1, 1)));
  const PartitionLevels pl({0.5, 1.0}, {v1(1.0), v1(-2.0)});
  const auto rep = convergence_report(*f.gauss, table, s, pl, {1 << 12}, 1L << 14);
  // Limit: sum dt zeta(lam/|lam|) |lam|^2 = 0.5*0.5 + 0.5*2 = 1.25.
  CHECK(rep.limit == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(rep.rows[0].rel_error < 0.03);
}

TEST_CASE("prelimit R4: balanced-RV limit matches the quadratic route") {
  Fixture f;
  auto lm = std::make_shared<CoefficientModel>(CoefficientModel::long_memory(0.75, 1.0, 1 << 16));
  const WindowSumTable table(*lm);
  const auto s = Scenario::make(ScenarioTag::R4, f.gauss, lm, 1.6,
                                gaussian_lambda_rv(Mat::Identity(1, 1)));
  const PartitionLevels pl({1.0}, {v1(1.0)});
  // For a Gaussian RV the h-power limit coincides with the quadratic one.
  const double lim = prelimit_limit(*f.gauss, s, pl);
  CHECK(lim == doctest::Approx(quadratic_lambda_rl(Mat::Identity(1, 1), 0.75, 1.0, 0.0, pl))
                   .epsilon(1e-6));
  const auto rep = convergence_report(*f.gauss, table, s, pl, {1 << 12}, 1L << 14);
  CHECK(rep.rows[0].rel_error < 0.15);
}

TEST_CASE("prelimit: truncation robustness against the reported bound") {
  Fixture f;
  auto lm = std::make_shared<CoefficientModel>(CoefficientModel::long_memory(0.75, 1.0, 1 << 17));
  const WindowSumTable table(*lm);
  const auto s = Scenario::make(ScenarioTag::R1, f.gauss, lm);
  const PartitionLevels pl({1.0}, {v1(0.8)});
  const long n = 1 << 9;
  const auto v1r = prelimit_sum(*f.gauss, table, s, pl, n, 1L << 13);
  const auto v2r = prelimit_sum(*f.gauss, table, s, pl, n, 1L << 14);
  CHECK(std::isfinite(v1r.tail_bound));
  CHECK(v1r.tail_bound > 0.0);
  CHECK(std::fabs(v2r.value - v1r.value) <= v1r.tail_bound);
  CHECK(v2r.tail_bound < v1r.tail_bound);
}

TEST_CASE("prelimit: bounded domain flags the violating index") {
  auto lap = std::make_shared<NoiseModel>(NoiseModel::laplace(1, 1.0));
  // Oscillating taps give a window of mass 2; a level of 0.6 pushes the
  // argument to 1.2, outside the Laplace domain.
  std::vector<double> taps(201, 0.0);
  taps[0] = 2.0;
  taps[200] = -1.0;
  auto osc = std::make_shared<CoefficientModel>(CoefficientModel::finite_support(taps, 0, 1 << 14));
  const WindowSumTable table(*osc);
  const auto s = Scenario::make(ScenarioTag::S1, lap, osc);
  const auto v = prelimit_sum(*lap, table, s, PartitionLevels({1.0}, {v1(0.6)}), 64, 256);
  CHECK(v.infinite);
  CHECK(v.value == kInf);
}

TEST_CASE("window sum of squares approaches the quadratic-limit constant") {
  // sum_l phi_{l,n}^2/(n Psi_n^2) -> K = sigma^2 * 2/((2-2a)(3-2a)), the
  // quadratic specialization of the long-memory block limits. Convergence
  // carries the slow Psi_n correction, so the 5% band is checked at n = 2^15.
  const auto lm = CoefficientModel::long_memory(0.75, 1.0, (1L << 22));
  const WindowSumTable table(lm);
  const long n = 1L << 15;
  const double psi_n = lm.psi_partial(n);
  const double got = table.sum_sq_windows(n, (1L << 22) - n) /
                     (static_cast<double>(n) * psi_n * psi_n);
  const double k = gaussian_sigma2(0.75, 1.0, 0.0) * 2.0 / (0.5 * 1.5);
  CHECK(std::fabs(got - k) / k < 0.05);
}

TEST_CASE("convergence report: S2 errors fall monotonically") {
  Fixture f;
  auto geo = std::make_shared<CoefficientModel>(CoefficientModel::geometric(0.5, 1 << 17));
  const WindowSumTable table(*geo);
  const auto s = Scenario::make(ScenarioTag::S2, f.gauss, geo);
  const PartitionLevels pl({0.5, 1.0}, {v1(1.0), v1(-1.0)});
  std::vector<long> grid;
  for (int k = 8; k <= 13; ++k) grid.push_back(1L << k);
  const auto rep = convergence_report(*f.gauss, table, s, pl, grid);
  int inversions = 0;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    if (rep.rows[i].rel_error > rep.rows[i - 1].rel_error) ++inversions;
  CHECK(inversions <= 1);
  CHECK(rep.rows.back().rel_error < 0.01);
}
