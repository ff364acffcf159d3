// Command-line front end: binds JSON job configs to the library operations
// and emits CSV/JSON artifacts.
//
// Exit codes: 0 success; 2 config/validation error; 3 numerical-precision
// flag raised while running with --strict.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ldp/limits.hpp"
#include "ldp/montecarlo.hpp"
#include "ldp/rates.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

struct JobContext {
  json config;
  fs::path out_dir;
  std::uint64_t seed = 0;
  int threads = 1;
  bool strict = false;
  bool dump_coefficients = false;
  bool imprecise_flag = false;
};

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&now));
  return buf;
}

void write_csv(const fs::path& path, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path);
  os << "# generated-at: " << iso_timestamp() << "\n" << header << "\n";
  os.precision(17);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  }
}

void write_summary(const JobContext& ctx, const std::string& command, json results) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["seed"] = ctx.seed;
  j["config"] = ctx.config;
  j["results"] = std::move(results);
  std::ofstream os(ctx.out_dir / "summary.json");
  os << j.dump(2) << "\n";
}

ldp::Vec vec_from_json(const json& j) {
  if (j.is_number()) {
    ldp::Vec v(1);
    v[0] = j.get<double>();
    return v;
  }
  const auto a = j.get<std::vector<double>>();
  ldp::Vec v(static_cast<int>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i];
  return v;
}

ldp::PartitionLevels partition_from_json(const json& j) {
  std::vector<double> times = j.at("times").get<std::vector<double>>();
  std::vector<ldp::Vec> levels;
  for (const auto& l : j.at("levels")) levels.push_back(vec_from_json(l));
  return ldp::PartitionLevels(std::move(times), std::move(levels));
}

ldp::PiecewiseConstFn grid_fn_from_json(const json& j) {
  if (j.contains("constant")) {
    const int m = j.value("m", 64);
    return ldp::PiecewiseConstFn::constant(vec_from_json(j.at("constant")), m);
  }
  ldp::PiecewiseConstFn f;
  f.edges = j.at("edges").get<std::vector<double>>();
  for (const auto& c : j.at("cells")) f.cell.push_back(vec_from_json(c));
  if (f.edges.size() != f.cell.size() + 1)
    throw std::invalid_argument("grid function: edges must be cells + 1");
  return f;
}

struct Models {
  std::shared_ptr<const ldp::NoiseModel> noise;
  std::shared_ptr<const ldp::CoefficientModel> coeffs;
  std::unique_ptr<ldp::WindowSumTable> table;
  std::optional<ldp::Scenario> scenario;
};

Models load_models(const JobContext& ctx, bool need_table, bool need_scenario) {
  const json& cfg = ctx.config;
  Models m;
  if (cfg.contains("noise"))
    m.noise = std::make_shared<ldp::NoiseModel>(ldp::NoiseModel::from_json(cfg.at("noise")));
  if (cfg.contains("coefficients")) {
    m.coeffs = std::make_shared<ldp::CoefficientModel>(
        ldp::CoefficientModel::from_json(cfg.at("coefficients")));
    if (need_table) m.table = std::make_unique<ldp::WindowSumTable>(*m.coeffs);
    if (ctx.dump_coefficients) {
      // (i, phi_i) for plotting; strided so the dump stays manageable.
      const long a = m.coeffs->radius();
      const long stride = std::max(1L, (2 * a + 1) / 65536);
      std::vector<std::vector<double>> rows;
      for (long i = -a; i <= a; i += stride)
        rows.push_back({static_cast<double>(i), m.coeffs->phi(i)});
      write_csv(ctx.out_dir / "coefficients.csv", "i,phi", rows);
    }
  }
  if (need_scenario) {
    if (!m.noise || !m.coeffs)
      throw std::invalid_argument("config: scenario jobs need noise and coefficients");
    m.scenario = ldp::Scenario::from_json(cfg.value("scenario", json{{"tag", "S1"}}), m.noise,
                                          m.coeffs);
  }
  return m;
}

double alpha_of(const json& cfg, const Models& m) {
  if (cfg.contains("alpha")) return cfg.at("alpha").get<double>();
  if (m.coeffs) return m.coeffs->alpha();
  throw std::invalid_argument("config: alpha required");
}

double p_of(const json& cfg, const Models& m) {
  if (cfg.contains("p")) return cfg.at("p").get<double>();
  if (m.coeffs) return m.coeffs->p();
  return 1.0;
}

int run_rate_eval(JobContext& ctx) {
  const auto m = load_models(ctx, false, false);
  if (!m.noise) throw std::invalid_argument("rate-eval: noise required");
  const auto pl = partition_from_json(ctx.config.at("partition"));
  const double alpha = alpha_of(ctx.config, m);
  const double p = p_of(ctx.config, m);
  const auto r = ldp::lambda_rl(*m.noise, alpha, p, 1.0 - p, pl);
  ctx.imprecise_flag = r.imprecise;
  json res{{"value", r.value},
           {"tail_bound", r.tail_bound},
           {"imprecise", r.imprecise}};
  if (r.domain_violation_x) res["domain_violation_x"] = *r.domain_violation_x;
  write_summary(ctx, "rate-eval", res);
  return 0;
}

int run_conjugate(JobContext& ctx) {
  const auto m = load_models(ctx, false, false);
  if (!m.noise) throw std::invalid_argument("conjugate: noise required");
  const double alpha = alpha_of(ctx.config, m);
  const double p = p_of(ctx.config, m);
  const auto times = ctx.config.at("times").get<std::vector<double>>();
  std::vector<ldp::Vec> incr;
  for (const auto& w : ctx.config.at("increments")) incr.push_back(vec_from_json(w));
  const auto r = ldp::conjugate_rl(*m.noise, alpha, p, 1.0 - p, times, incr);
  ctx.imprecise_flag = r.imprecise;
  write_summary(ctx, "conjugate",
                json{{"value", r.value}, {"unbounded", r.unbounded}});
  return 0;
}

int run_gauss_rate(JobContext& ctx) {
  const auto& cfg = ctx.config;
  ldp::Mat sigma;
  if (cfg.contains("sigma")) {
    const auto rows = cfg.at("sigma");
    const int d = static_cast<int>(rows.size());
    sigma.resize(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) sigma(r, c) = rows.at(r).at(c).get<double>();
  } else {
    sigma = ldp::Mat::Identity(1, 1);
  }
  const double alpha = cfg.at("alpha").get<double>();
  const double p = cfg.value("p", 1.0);
  const auto mode = cfg.value("mode", std::string("variational")) == "closed-form"
                        ? ldp::GaussRateMode::ClosedForm
                        : ldp::GaussRateMode::Variational;
  const auto phi = grid_fn_from_json(cfg.at("phi"));
  const auto r = ldp::gaussian_rate_alpha(sigma, alpha, p, 1.0 - p, phi, mode);
  ctx.imprecise_flag = r.ridge_used;
  json res{{"value", r.value}, {"infinite", r.infinite}, {"ridge_used", r.ridge_used}};
  if (cfg.contains("m_grid") && mode == ldp::GaussRateMode::Variational) {
    // Refinement trace (m, value): nondecreasing along nested grids.
    std::vector<std::vector<double>> rows;
    json trace = json::array();
    for (const long m : cfg.at("m_grid").get<std::vector<long>>()) {
      const auto rm = ldp::gaussian_rate_alpha(sigma, alpha, p, 1.0 - p,
                                               phi.refined(static_cast<int>(m)), mode);
      rows.push_back({static_cast<double>(m), rm.value});
      trace.push_back({m, rm.value});
    }
    write_csv(ctx.out_dir / "gauss-rate.csv", "m,value", rows);
    res["refinement_trace"] = trace;
  }
  write_summary(ctx, "gauss-rate", res);
  return 0;
}

int run_verify_limits(JobContext& ctx) {
  const auto m = load_models(ctx, true, true);
  const auto pl = partition_from_json(ctx.config.at("partition"));
  const auto grid = ctx.config.at("n_grid").get<std::vector<long>>();
  std::optional<long> a_n;
  if (ctx.config.contains("A_n")) a_n = ctx.config.at("A_n").get<long>();
  const auto rep = ldp::convergence_report(*m.noise, *m.table, *m.scenario, pl, grid, a_n);
  std::vector<std::vector<double>> rows;
  for (const auto& r : rep.rows)
    rows.push_back({static_cast<double>(r.n), r.prelimit, r.limit, r.rel_error});
  write_csv(ctx.out_dir / "verify-limits.csv", "n,prelimit,limit,rel_error", rows);
  write_summary(ctx, "verify-limits",
                json{{"limit", rep.limit},
                     {"fitted_exponent", rep.fitted_exponent},
                     {"final_rel_error", rep.rows.empty() ? 0.0 : rep.rows.back().rel_error}});
  return 0;
}

ldp::SimConfig sim_config(const json& cfg, const Models& m, const JobContext& ctx) {
  ldp::SimConfig sc;
  sc.noise = m.noise.get();
  sc.table = m.table.get();
  sc.scenario = &*m.scenario;
  sc.n = cfg.at("n").get<long>();
  sc.m_trunc = cfg.value("M", m.coeffs->radius());
  sc.replications = cfg.value("replications", 10000L);
  if (cfg.contains("theta")) sc.tilt_theta = cfg.at("theta").get<double>();
  sc.seed = ctx.seed;
  sc.threads = ctx.threads;
  return sc;
}

int run_simulate(JobContext& ctx) {
  const auto m = load_models(ctx, true, true);
  const auto sc = sim_config(ctx.config, m, ctx);
  const int grid_points = ctx.config.value("grid_points", 65);
  const long paths = std::min<long>(sc.replications, ctx.config.value("paths", 4L));
  std::vector<std::vector<double>> rows;
  for (long rep = 0; rep < paths; ++rep) {
    const auto ps = ldp::simulate_path(sc, rep, grid_points);
    for (int g = 0; g < grid_points; ++g)
      rows.push_back({static_cast<double>(rep), ps.t[g], ps.step[g], ps.polygonal[g]});
  }
  write_csv(ctx.out_dir / "simulate.csv", "replicate,t,step,polygonal", rows);
  write_summary(ctx, "simulate",
                json{{"paths", paths}, {"grid_points", grid_points}, {"n", sc.n}});
  return 0;
}

int run_tail(JobContext& ctx) {
  const auto m = load_models(ctx, true, true);
  const auto sc = sim_config(ctx.config, m, ctx);
  const double x = ctx.config.at("x").get<double>();
  const std::string method = ctx.config.value("method", "tilted");
  ldp::TailEstimate est;
  if (method == "exact")
    // With an explicit truncation M the job describes the truncated-filter
    // model, so the oracle matches it; otherwise the full materialized
    // filter is evaluated.
    est = ctx.config.contains("M") ? ldp::exact_gaussian_tail_truncated(sc, x)
                                   : ldp::exact_gaussian_tail(*m.table, *m.scenario, sc.n, x);
  else if (method == "direct")
    est = ldp::estimate_tail(sc, x, ldp::TailMethod::Direct);
  else if (method == "tilted")
    est = ldp::estimate_tail(sc, x, ldp::TailMethod::Tilted);
  else
    throw std::invalid_argument("tail: method must be exact|direct|tilted");
  write_csv(ctx.out_dir / "tail.csv", "x,estimate,log_estimate,ci_lo,ci_hi,ess",
            {{x, est.estimate, est.log_estimate, est.ci_lo, est.ci_hi,
              est.effective_sample_size}});
  write_summary(ctx, "tail",
                json{{"x", x},
                     {"method", est.method},
                     {"estimate", est.estimate},
                     {"log_estimate", est.log_estimate},
                     {"ci", {est.ci_lo, est.ci_hi}},
                     {"effective_sample_size", est.effective_sample_size},
                     {"tilt_theta", est.tilt_theta}});
  return 0;
}

int run_speed_scan(JobContext& ctx) {
  const auto m = load_models(ctx, true, true);
  auto sc = sim_config(ctx.config, m, ctx);
  const double x = ctx.config.at("x").get<double>();
  const auto grid = ctx.config.at("n_grid").get<std::vector<long>>();
  const auto scan = ldp::speed_scan(sc, grid, x);
  std::vector<std::vector<double>> rows;
  for (const auto& r : scan.rows)
    rows.push_back({static_cast<double>(r.n), r.neg_log_p, r.b_n, r.ratio});
  write_csv(ctx.out_dir / "speed-scan.csv", "n,neg_log_p,b_n,ratio", rows);
  write_summary(ctx, "speed-scan",
                json{{"fitted_slope", scan.fitted_slope},
                     {"final_ratio", scan.rows.empty() ? 0.0 : scan.rows.back().ratio}});
  return 0;
}

int run_pi_check(JobContext& ctx) {
  const auto m = load_models(ctx, true, false);
  if (!m.noise || !m.table)
    throw std::invalid_argument("pi-check: noise and coefficients required");
  const auto pl = partition_from_json(ctx.config.at("partition"));
  const long n_max = ctx.config.value("N_max", 64L);
  const long j_max = ctx.config.value("J_max", 1024L);
  const auto v = ldp::pi_membership(*m.noise, *m.table, pl, n_max, j_max);
  const char* kind = v.kind == ldp::PiVerdictKind::FeasibleUpTo    ? "FeasibleUpTo"
                     : v.kind == ldp::PiVerdictKind::InfeasibleAt ? "InfeasibleAt"
                                                                  : "DomainViolation";
  write_summary(ctx, "pi-check",
                json{{"verdict", kind}, {"n", v.n}, {"j", v.j}, {"detail", v.detail}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rate functions and rare-event estimation for infinite moving averages"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  std::uint64_t seed = 1;
  int threads = 0;
  bool strict = false;
  app.add_option("--config", config_path, "job config JSON")->required();
  app.add_option("--out", out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed override");
  app.add_flag("--strict", strict, "exit 3 when precision flags are raised");
  bool dump_coeffs = false;
  app.add_flag("--dump-coefficients", dump_coeffs, "also write coefficients.csv (i, phi_i)");
  app.add_option("--threads", threads, "worker cap (overrides LDP_THREADS)");

  const std::vector<std::pair<std::string, int (*)(JobContext&)>> commands = {
      {"rate-eval", run_rate_eval},   {"conjugate", run_conjugate},
      {"gauss-rate", run_gauss_rate}, {"verify-limits", run_verify_limits},
      {"simulate", run_simulate},     {"tail", run_tail},
      {"speed-scan", run_speed_scan}, {"pi-check", run_pi_check}};
  for (const auto& c : commands) app.add_subcommand(c.first, "")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << e.what() << "\n";
    return 2;
  }

  JobContext ctx;
  ctx.strict = strict;
  ctx.dump_coefficients = dump_coeffs;
  try {
    std::ifstream is(config_path);
    if (!is) throw std::invalid_argument("cannot open config: " + config_path);
    ctx.config = json::parse(is);
  } catch (const json::parse_error& e) {
    // Recover line/column from the byte offset for a usable message.
    std::ifstream is(config_path);
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::cerr << "config parse error at line " << line << ", column " << col << ": " << e.what()
              << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  ctx.out_dir = out_dir;
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  ctx.seed = seed_opt->count() > 0 ? seed : ctx.config.value("seed", 1ULL);
  if (threads > 0)
    ctx.threads = threads;
  else if (const char* env = std::getenv("LDP_THREADS"))
    ctx.threads = std::max(1, std::atoi(env));
  else
    ctx.threads = 1;

  try {
    int rc = 1;
    for (const auto& c : commands)
      if (app.get_subcommand(c.first)->parsed()) rc = c.second(ctx);
    if (rc == 0 && ctx.strict && ctx.imprecise_flag) {
      std::cerr << "numerical-precision flag raised (strict mode)\n";
      return 3;
    }
    return rc;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
