#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "ldp/coefficients.hpp"
#include "ldp/rng.hpp"
#include "ldp/util.hpp"

using namespace ldp;

TEST_CASE("phi values") {
  const auto lm = CoefficientModel::long_memory(0.75, 1.0, 64);
  CHECK(lm.phi(1) == 1.0);
  CHECK(lm.phi(-5) == 0.0);
  CHECK(lm.phi(0) == 1.0);
  CHECK(lm.phi(8) == doctest::Approx(std::pow(8.0, -0.75)).epsilon(1e-15));
  CHECK_THROWS_AS(lm.phi(65), std::out_of_range);

  const auto geo = CoefficientModel::geometric(0.5, 64);
  CHECK(geo.phi(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(geo.phi(2) == doctest::Approx(1.0 / 12.0).epsilon(1e-14));

  const auto id = CoefficientModel::finite_support({1.0}, 0, 8);
  CHECK(id.phi(0) == 1.0);
  CHECK(id.phi(1) == 0.0);
}

TEST_CASE("short-memory normalization sums to one") {
  for (long a : {16L, 256L, 4096L}) {
    const auto geo = CoefficientModel::geometric(0.7, a);
    KahanSum s;
    for (long i = -a; i <= a; ++i) s.add(geo.phi(i));
    CHECK(std::fabs(s.value() - 1.0) < 1e-12);
  }
  const auto fs = CoefficientModel::finite_support({2.0, 3.0, -1.0}, -1, 4);
  KahanSum s;
  for (long i = -4; i <= 4; ++i) s.add(fs.phi(i));
  CHECK(std::fabs(s.value() - 1.0) < 1e-12);
}

TEST_CASE("windowed sums") {
  const auto geo = CoefficientModel::geometric(0.5, 1 << 14);
  const WindowSumTable tg(geo);
  CHECK(tg.window_sum(0, 1) == doctest::Approx(geo.phi(1)).epsilon(1e-15));
  CHECK(tg.window_sum(-1000, 2000) == doctest::Approx(1.0).epsilon(1e-6));

  const auto lm = CoefficientModel::long_memory(0.75, 1.0, 1 << 10);
  const WindowSumTable tl(lm);
  // 1 + 2^-3/4 + 3^-3/4 + 4^-3/4
  CHECK(tl.window_sum(0, 4) == doctest::Approx(2.386848285745465).epsilon(1e-14));
  CHECK_THROWS_AS(tl.window_sum(1 << 10, 4), std::out_of_range);
  CHECK_THROWS_WITH_AS(tl.window_sum(-(1 << 12), 4), doctest::Contains("raise"),
                       std::out_of_range);

  // |phi_{i,n}| <= |phi|_{i,n} on random windows.
  const auto mixed = CoefficientModel::long_memory(0.8, 0.3, 1 << 10);
  const WindowSumTable tm(mixed);
  const CounterRng rng(17);
  for (int it = 0; it < 300; ++it) {
    const long i = static_cast<long>(rng.uniform(0, 2 * it) * 1500.0) - 900;
    const long n = 1 + static_cast<long>(rng.uniform(0, 2 * it + 1) * 100.0);
    CHECK(std::fabs(tm.window_sum(i, n)) <= tm.abs_window_sum(i, n) + 1e-15);
  }

  // range_sum clips to the materialized support.
  CHECK(tg.range_sum(-(1 << 20), 1 << 20) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tg.range_sum(5, 4) == 0.0);
}

TEST_CASE("psi partial sums") {
  const auto h = CoefficientModel::long_memory(1.0, 1.0, 8);
  CHECK(h.psi_partial(4) == doctest::Approx(2.083333333333333).epsilon(1e-14));
  const auto lm = CoefficientModel::long_memory(0.75, 1.0, 8);
  CHECK(lm.psi_partial(1) == 1.0);
  // Euler-Maclaurin 2-term estimate: 4 n^{1/4} + zeta(3/4).
  const double em = 4.0 * std::pow(1e4, 0.25) + (-3.4412853869452229);
  CHECK(lm.psi_partial(10000) == doctest::Approx(em).epsilon(1e-3));
  CHECK_THROWS_AS(CoefficientModel::geometric(0.5, 8).psi_partial(4), std::logic_error);
}

TEST_CASE("regular variation diagnostics") {
  const auto lm = CoefficientModel::long_memory(0.75, 1.0, 1 << 12);
  auto r = rv_diagnostic(lm, 2.0, 100);
  CHECK(r.ratio == doctest::Approx(std::pow(2.0, -0.75)).epsilon(1e-14));
  CHECK(r.rel_error < 1e-12);
  CHECK(rv_diagnostic(lm, 1.0, 500).ratio == 1.0);

  const auto lg = CoefficientModel::long_memory(1.0, 1.0, 1 << 12, SlowVarKind::LogPower, 1.0);
  r = rv_diagnostic(lg, 2.0, 1000);
  const double expect = 0.5 * std::log(2000.0) / std::log(1000.0);
  CHECK(r.ratio == doctest::Approx(expect).epsilon(1e-12));
  // The log correction is log(2)/log(n); it clears a 5% band only once
  // log n > 20 log 2.
  const auto r2 = rv_diagnostic(lg, 2.0, 4000000);
  CHECK(std::fabs(r2.ratio - 0.5) / 0.5 < 0.05);
}

TEST_CASE("Karamata: n psi(n)/Psi_n -> 1 - alpha") {
  const auto a55 = CoefficientModel::long_memory(0.55, 1.0, 4);
  const double n1 = 1e4;
  const double k1 = n1 * a55.psi(n1) / a55.psi_partial(static_cast<long>(n1));
  CHECK(std::fabs(k1 - 0.45) / 0.45 < 0.02);
  // The zeta(alpha) correction decays like n^{alpha-1}; alpha = 3/4 needs a
  // larger n to clear the same 2% band.
  const auto a75 = CoefficientModel::long_memory(0.75, 1.0, 4);
  const double n2 = static_cast<double>(1L << 22);
  const double k2 = n2 * a75.psi(n2) / a75.psi_partial(1L << 22);
  CHECK(std::fabs(k2 - 0.25) / 0.25 < 0.02);
}

TEST_CASE("Potter sandwich on sampled pairs") {
  // psi(j)/psi(n) within (1 +- eps) (j/n)^{-alpha +- eps} for j, n >= n_eps.
  // n_eps is model-dependent: immediate for a pure power, large for the
  // log-slowly-varying family (the log ratio must fit inside the eps-power).
  const double eps = 0.05;
  struct Case {
    CoefficientModel m;
    double n_min, n_span, r_span;
  };
  const Case cases[] = {
      {CoefficientModel::long_memory(0.75, 1.0, 4), 64.0, 1024.0, 32.0},
      {CoefficientModel::long_memory(0.9, 0.5, 4, SlowVarKind::LogPower, 1.0), 2097152.0, 8.0,
       8.0},
  };
  for (const auto& c : cases) {
    const double a = c.m.alpha();
    const CounterRng rng(31);
    for (int it = 0; it < 400; ++it) {
      const double n = c.n_min * std::pow(c.n_span, rng.uniform(1, 2 * it));
      const double ratio_jn = std::pow(c.r_span, 2.0 * rng.uniform(1, 2 * it + 1) - 1.0);
      const double j = n * ratio_jn;
      if (j < c.n_min) continue;
      const double lhs = c.m.psi(j) / c.m.psi(n);
      const double lo = (1.0 - eps) * std::min(std::pow(ratio_jn, -a - eps), std::pow(ratio_jn, -a + eps));
      const double hi = (1.0 + eps) * std::max(std::pow(ratio_jn, -a - eps), std::pow(ratio_jn, -a + eps));
      CHECK(lhs >= lo);
      CHECK(lhs <= hi);
    }
  }
}

TEST_CASE("long-memory side ratios approach p and q") {
  const long a = 1 << 12;
  const auto m = CoefficientModel::long_memory(0.8, 0.3, a);
  const long n = a / 2;
  CHECK(std::fabs(m.phi(n) / m.psi(static_cast<double>(n)) - 0.3) < 1e-3);
  CHECK(std::fabs(m.phi(-n) / m.psi(static_cast<double>(n)) - 0.7) < 1e-3);
}

TEST_CASE("tail bounds shrink") {
  const auto geo = CoefficientModel::geometric(0.5, 1 << 10);
  CHECK(geo.tail_bound_abs(100) < 1e-25);
  CHECK(geo.tail_bound_sq(100) < geo.tail_bound_sq(50));
  const auto lm = CoefficientModel::long_memory(0.75, 1.0, 1 << 10);
  CHECK(lm.tail_bound_abs(100) == kInf);
  CHECK(lm.tail_bound_sq(1000) < lm.tail_bound_sq(100));
  // The bound really dominates the tail it bounds.
  KahanSum tail;
  for (long i = 201; i <= (1 << 10); ++i) {
    tail.add(lm.phi(i) * lm.phi(i));
    tail.add(lm.phi(-i) * lm.phi(-i));
  }
  CHECK(tail.value() <= lm.tail_bound_sq(200));
}

TEST_CASE("json round trip") {
  const auto j = nlohmann::json::parse(
      R"({"regime":"long","alpha":0.75,"p":1.0,"A":1024,"slow_var":{"log_power":1.0}})");
  const auto m = CoefficientModel::from_json(j);
  CHECK(m.regime() == Regime::LongMemory);
  CHECK(m.alpha() == 0.75);
  const auto m2 = CoefficientModel::from_json(m.to_json());
  CHECK(m2.phi(17) == m.phi(17));
  const auto g = CoefficientModel::from_json(
      nlohmann::json::parse(R"({"regime":"short","generator":"geometric","rho":0.5,"A":64})"));
  CHECK(g.phi(0) == doctest::Approx(1.0 / 3.0));
}
