// Experiment runner: every subcommand reads an optional JSON config, runs a
// deterministic experiment keyed by --seed, and writes CSV tables plus a
// key/value summary sidecar carrying the config echo and its hash.  Outputs
// depend only on (config, seed), never on --workers.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "viana/acceptance.hpp"
#include "viana/config.hpp"
#include "viana/csv.hpp"
#include "viana/curves.hpp"
#include "viana/fibered.hpp"
#include "viana/recurrence.hpp"
#include "viana/statistics.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace viana;
using config::get_int;
using config::get_num;
using config::get_str;

struct Options {
  std::string config_path;
  std::uint64_t seed = 7;
  unsigned workers = 1;
  std::string out_dir = "out";
};

/// Accumulates tables and summary lines; nothing touches the filesystem
/// until finish(), so config errors never leave partial output behind.
struct Run {
  std::string sub;
  Options opt;
  json cfg;
  std::string canon;
  std::string hash;
  std::vector<std::string> lines;
  std::vector<std::pair<std::string, csv::Table>> tables;
  int failed = 0;

  Run(std::string name, const Options& o) : sub(std::move(name)), opt(o) {
    cfg = o.config_path.empty() ? json::object() : config::load_file(o.config_path);
    canon = config::canonical(cfg);
    hash = csv::hex64(csv::fnv1a(canon + "|seed=" + std::to_string(o.seed)));
  }

  void note(const std::string& k, const std::string& v) { lines.push_back(k + " = " + v); }
  void note(const std::string& k, double v) { note(k, csv::format_double(v)); }
  void note(const std::string& k, std::int64_t v) { note(k, std::to_string(v)); }

  void check(const std::string& what, double value, const std::string& rel,
             double bound, bool pass) {
    lines.push_back("check: " + what + " | value = " + csv::format_double(value) +
                    " | " + rel + " " + csv::format_double(bound) + " | " +
                    (pass ? "pass" : "FAIL"));
    if (!pass) ++failed;
  }
  void check_le(const std::string& what, double value, double bound) {
    check(what, value, "<=", bound, value <= bound);
  }
  void check_ge(const std::string& what, double value, double bound) {
    check(what, value, ">=", bound, value >= bound);
  }
  void check_true(const std::string& what, bool ok) {
    check(what, ok ? 1.0 : 0.0, "==", 1.0, ok);
  }

  int finish() {
    fs::create_directories(opt.out_dir);
    for (const auto& [name, table] : tables) table.write(fs::path(opt.out_dir) / name);
    fs::path spath = fs::path(opt.out_dir) / (sub + "_summary.txt");
    std::ofstream f(spath, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + spath.string());
    f << "command = " << sub << "\n";
    f << "seed = " << opt.seed << "\n";
    f << "config_hash = " << hash << "\n";
    f << "config = " << canon << "\n";
    for (const auto& l : lines) f << l << "\n";
    f << "status = " << (failed ? "FAIL" : "ok") << "\n";
    std::printf("%s: wrote %zu table(s) + %s_summary.txt to %s [%s]\n", sub.c_str(),
                tables.size(), sub.c_str(), opt.out_dir.c_str(),
                failed ? "FAIL" : "ok");
    return failed ? 3 : 0;
  }
};

/// Skew system from the config root, with a subcommand-specific default
/// perturbation size when the config does not pin one.
SkewSystem skew_for(const json& cfg, double dflt_alpha) {
  json eff = cfg;
  if (!eff.contains("alpha")) eff["alpha"] = dflt_alpha;
  return config::skew_from_json(eff);
}

int run_curves(const Options& opt) {
  Run r("curves", opt);
  SkewSystem sys = skew_for(r.cfg, 1e-3);
  const double alpha = sys.alpha();
  if (alpha <= 0) throw ConfigError("curves: alpha must be positive");
  const int count = int(get_int(r.cfg, "count", 20));
  const int grid = int(get_int(r.cfg, "grid", 20000));
  const int strip_grid = int(get_int(r.cfg, "strip_grid", 16384));
  const double dy_bound = (kTwoPi + 4.0) * alpha / 16.0;

  csv::Table t({"curve", "branch", "max_dy_over_alpha", "max_d2y_over_alpha",
                "transversality_margin", "strip_estimate", "strip_cap"});
  rng::Stream s(opt.seed, 1001);
  double worst_dy = 0, worst_d2y = 0, min_margin = 1e300, worst_strip = 0;
  std::int64_t violations = 0;
  for (int i = 0; i < count; ++i) {
    AdmissibleCurve c = AdmissibleCurve::random(s, sys.trap(), alpha);
    TransversalityReport tv = transversality_check(sys, c, grid);
    min_margin = std::min(min_margin, tv.margin);
    violations += std::int64_t(tv.violations);
    int j = 1 + int(s.below(5));
    double len = alpha * std::pow(10.0, s.uniform(-2.0, 0.0));
    double center = s.uniform(sys.trap().lo, sys.trap().hi);
    StripMeasure sm = strip_measure(sys, c, j, {center - len / 2, center + len / 2},
                                    strip_grid);
    double cap = sm.bound + sm.grid_band;
    if (cap > 0) worst_strip = std::max(worst_strip, sm.estimate / cap);
    for (int b = 0; b < sys.base().branch_count(); ++b) {
      PushedCurve pc = push_curve(sys, c, b, grid);
      worst_dy = std::max(worst_dy, pc.max_dy);
      worst_d2y = std::max(worst_d2y, pc.max_d2y);
      t.add_row(std::int64_t(i), std::int64_t(b), pc.max_dy / alpha,
                pc.max_d2y / alpha, tv.margin, sm.estimate, cap);
    }
  }
  r.tables.emplace_back("curves.csv", std::move(t));
  r.note("alpha", alpha);
  r.note("count", std::int64_t(count));
  r.note("grid", std::int64_t(grid));
  r.check_le("pushed slope sup |Y1'| vs (2pi+4) alpha / 16", worst_dy,
             dy_bound * (1 + 1e-12));
  r.check_le("pushed curvature sup |Y1''| vs alpha", worst_d2y, alpha * (1 + 1e-12));
  r.check_le("transversality violations", double(violations), 0.0);
  r.check_ge("worst transversality margin", min_margin, 0.0);
  r.check_le("worst strip estimate / (bound + grid band)", worst_strip, 1.0);
  return r.finish();
}

int run_recurrence(const Options& opt, const std::vector<double>& ladder,
                   std::vector<int> n_grid, int samples) {
  Run r("recurrence", opt);
  SkewSystem sys = skew_for(r.cfg, 1e-2);
  const double alpha = sys.alpha();
  if (alpha <= 0) throw ConfigError("recurrence: alpha must be positive");
  if (n_grid.empty()) n_grid = {100, 1000, 10000};
  for (std::size_t k = 1; k < n_grid.size(); ++k)
    if (n_grid[k] <= n_grid[k - 1] || n_grid[k - 1] <= 0)
      throw ConfigError("recurrence: --n-grid must be positive and increasing");
  for (double a : ladder)
    if (a <= 0 || a >= 1) throw ConfigError("recurrence: ladder alphas must be in (0,1)");

  const int grid = int(get_int(r.cfg, "grid", 65536));
  const int r_lo = int(get_int(r.cfg, "r_lo", 2));
  const int r_hi = int(get_int(r.cfg, "r_hi", 8));
  double level = get_num(r.cfg, "curve_level", std::sqrt(sys.a0()));
  AdmissibleCurve crit = AdmissibleCurve::constant(level, alpha);
  std::vector<DeepTailRow> rows = deep_return_tail(sys, crit, r_lo, r_hi, grid);
  csv::Table dt({"r", "measure", "bound", "wilson_lo", "wilson_hi", "below_range",
                 "censored"});
  for (const auto& row : rows)
    dt.add_row(std::int64_t(row.r), row.measure, row.bound, row.band.lo, row.band.hi,
               std::int64_t(row.below_range), std::int64_t(row.censored));
  r.tables.emplace_back("recurrence_deep_tail.csv", std::move(dt));

  ExponentSummary ly = lyapunov_mc(sys, 2000, 100, opt.seed + 801, opt.workers);
  rng::Stream s(opt.seed, 802);
  Point z = sys.random_point(s);
  double delta = get_num(r.cfg, "delta", std::sqrt(alpha));
  double acc = 0;
  const int rate_steps = int(get_int(r.cfg, "rate_steps", 50000));
  for (int j = 0; j < rate_steps; ++j) {
    double ax = std::abs(z.x);
    if (ax < delta && ax > 0) acc += -std::log(ax);
    z = sys.step(z);
  }
  double c_target = get_num(r.cfg, "c_target", 0.95 * ly.mean_fiber);
  double eps = get_num(r.cfg, "eps_budget", 1.10 * acc / double(rate_steps));
  StoppingTails st =
      expansion_time_tails(sys, c_target, eps, delta, n_grid, samples, opt.seed,
                           opt.workers);
  csv::Table sg({"n", "tail_Ev", "tail_R", "Ev_lo", "Ev_hi", "R_lo", "R_hi"});
  for (const auto& row : st.rows)
    sg.add_row(std::int64_t(row.n), row.tail_expansion, row.tail_recurrence,
               row.band_expansion.lo, row.band_expansion.hi,
               row.band_recurrence.lo, row.band_recurrence.hi);
  r.tables.emplace_back("recurrence_stopping.csv", std::move(sg));

  if (!ladder.empty()) {
    OnsetLadder ol = n_of_alpha_ladder(sys.params(), ladder, samples, opt.seed,
                                       int(get_int(r.cfg, "onset_cap", 100000)),
                                       opt.workers);
    csv::Table ot({"alpha", "n_hat", "eta_fit", "resolved", "censored"});
    for (const auto& row : ol.rows)
      ot.add_row(row.alpha, std::int64_t(row.n_hat), row.eta_fit,
                 std::int64_t(row.resolved), std::int64_t(row.censored));
    r.tables.emplace_back("recurrence_onset.csv", std::move(ot));
    r.note("onset_k0", ol.k0);
    r.note("onset_k1", ol.k1);
  }

  r.note("alpha", alpha);
  r.note("delta", delta);
  r.note("c_target", c_target);
  r.note("eps_budget", eps);
  r.note("censored_Ev", std::int64_t(st.censored_expansion));
  r.note("censored_R", std::int64_t(st.censored_recurrence));
  r.note("Ev_logtail_slope_vs_sqrt_n", st.fit_expansion.slope);
  r.note("R_logtail_slope_vs_sqrt_n", st.fit_recurrence.slope);
  bool mono = true;
  for (std::size_t k = 1; k < st.rows.size(); ++k) {
    if (st.rows[k].tail_expansion > st.rows[k - 1].tail_expansion) mono = false;
    if (st.rows[k].tail_recurrence > st.rows[k - 1].tail_recurrence) mono = false;
  }
  r.check_true("stopping-time tails nonincreasing", mono);
  bool deep_mono = true;
  for (std::size_t k = 1; k < rows.size(); ++k)
    if (rows[k].band.lo > rows[k - 1].band.hi) deep_mono = false;
  r.check_true("deep-return tail nonincreasing within Wilson bands", deep_mono);
  return r.finish();
}

int run_lyapunov(const Options& opt) {
  Run r("lyapunov", opt);
  SkewSystem sys = skew_for(r.cfg, 1e-2);
  const int n = int(get_int(r.cfg, "n", 10000));
  const int samples = int(get_int(r.cfg, "samples", 1000));
  ExponentSummary ly = lyapunov_mc(sys, n, samples, opt.seed, opt.workers);
  csv::Table t({"sample", "fiber", "base", "generic"});
  for (std::size_t i = 0; i < ly.fiber.size(); ++i)
    t.add_row(std::int64_t(i), ly.fiber[i], ly.base[i], ly.generic[i]);
  r.tables.emplace_back("lyapunov.csv", std::move(t));
  r.note("n", std::int64_t(n));
  r.note("samples", std::int64_t(samples));
  r.note("alpha", sys.alpha());
  r.note("fraction_positive", ly.frac_positive_fiber);
  r.note("mean_fiber", ly.mean_fiber);
  r.note("q05_fiber", ly.q05_fiber);
  r.note("q50_fiber", ly.q50_fiber);
  r.note("q95_fiber", ly.q95_fiber);
  r.note("mean_base", ly.mean_base);
  r.note("max_base_dev", ly.max_base_dev);
  r.note("mean_generic", ly.mean_generic);
  r.note("degenerate_resampled", std::int64_t(ly.degenerate));
  r.check_ge("fraction of positive fiber exponents",
             ly.frac_positive_fiber, get_num(r.cfg, "positive_tol", 0.99));
  return r.finish();
}

int run_density(const Options& opt) {
  Run r("density", opt);
  SkewSystem sys = skew_for(r.cfg, 1e-2);
  const int samples = int(get_int(r.cfg, "samples", 20));
  const int n = int(get_int(r.cfg, "n", 10000));
  const int burn = int(get_int(r.cfg, "burn", 100));
  const int bt = int(get_int(r.cfg, "bins_theta", 64));
  const int bx = int(get_int(r.cfg, "bins_x", 64));
  DensityGrid dg = invariant_density(sys, samples, n, burn, bt, bx, opt.seed,
                                     opt.workers);
  csv::Table t({"theta_bin", "x_bin", "fraction"});
  for (int i = 0; i < bt; ++i)
    for (int j = 0; j < bx; ++j)
      t.add_row(std::int64_t(i), std::int64_t(j),
                double(dg.counts[std::size_t(i) * std::size_t(bx) + std::size_t(j)]) /
                    double(dg.total));
  r.tables.emplace_back("density.csv", std::move(t));

  std::vector<double> mx = dg.x_marginal();
  std::vector<double> mt = dg.theta_marginal();
  csv::Table xm({"bin", "fraction"});
  for (std::size_t i = 0; i < mx.size(); ++i) xm.add_row(std::int64_t(i), mx[i]);
  r.tables.emplace_back("density_x_marginal.csv", std::move(xm));
  csv::Table tm({"bin", "fraction"});
  for (std::size_t i = 0; i < mt.size(); ++i) tm.add_row(std::int64_t(i), mt[i]);
  r.tables.emplace_back("density_theta_marginal.csv", std::move(tm));

  r.note("samples", std::int64_t(samples));
  r.note("n", std::int64_t(n));
  r.note("alpha", sys.alpha());
  r.note("x_range_lo", dg.x_range.lo);
  r.note("x_range_hi", dg.x_range.hi);
  r.note("transfer_tv", dg.transfer_tv());
  r.check_le("one-step transfer TV distance", dg.transfer_tv(), 4.0 / double(n));
  if (sys.alpha() == 0.0) {
    double l1 = l1_distance(mx, chebyshev_bin_masses(bx, sys.trap()));
    r.note("l1_vs_arcsine", l1);
    r.check_le("uncoupled fiber marginal vs arcsine law (L1)", l1,
               get_num(r.cfg, "density_tol", 0.05));
  }
  return r.finish();
}

Observable observable_by_name(const std::string& name, const SkewSystem& sys) {
  if (name == "x") return observable_x();
  if (name == "theta") return observable_theta();
  if (name == "x2") return observable_x2();
  if (name == "bump") {
    if (sys.bump()) return observable_bump(sys.bump()->center, sys.bump()->width);
    return observable_bump(0.5, 0.25);
  }
  throw ConfigError("unknown observable '" + name + "'");
}

int run_correlations(const Options& opt) {
  Run r("correlations", opt);
  SkewSystem sys = skew_for(r.cfg, 1e-2);
  const int max_lag = int(get_int(r.cfg, "max_lag", 64));
  const int samples = int(get_int(r.cfg, "samples", 20));
  const int n = int(get_int(r.cfg, "n", 8000));
  const int burn = int(get_int(r.cfg, "burn", 200));
  Observable h1 = observable_by_name(get_str(r.cfg, "observable", "x"), sys);
  Observable h2 = observable_by_name(get_str(r.cfg, "observable2",
                                             get_str(r.cfg, "observable", "x")),
                                     sys);
  CorrelationTable ct = correlation_decay(sys, h1, h2, max_lag, samples, n, burn,
                                          opt.seed, opt.workers);
  csv::Table t({"lag", "cov", "corr"});
  for (const auto& row : ct.rows) t.add_row(std::int64_t(row.lag), row.cov, row.corr);
  r.tables.emplace_back("correlations.csv", std::move(t));
  r.note("samples", std::int64_t(samples));
  r.note("n", std::int64_t(n));
  r.note("noise_floor", ct.noise_floor);
  r.note("stretched_slope_vs_sqrt_lag", ct.stretched_fit.slope);
  const int late = int(get_int(r.cfg, "late_lag", 50));
  double worst = 0;
  for (const auto& row : ct.rows)
    if (row.lag >= late) worst = std::max(worst, std::abs(row.corr));
  r.check_le("max |corr| at lags >= " + std::to_string(late), worst,
             get_num(r.cfg, "corr_tol", 0.05));
  r.check_true("log |corr| decreasing against sqrt(lag)", ct.decays);
  return r.finish();
}

int run_ldp(const Options& opt) {
  Run r("ldp", opt);
  SkewSystem sys = skew_for(r.cfg, 1e-2);
  const int samples = int(get_int(r.cfg, "samples", 500));
  const int burn = int(get_int(r.cfg, "burn", 100));
  std::vector<int> n_grid = config::get_int_list(r.cfg, "n_grid", {16, 32, 64, 128});
  Observable h = observable_by_name(get_str(r.cfg, "observable", "x"), sys);
  Moments mom = observable_moments(sys, h, int(get_int(r.cfg, "mean_n", 1000000)),
                                   burn, opt.seed, std::uint64_t(samples) + 7);
  double delta = get_num(r.cfg, "delta", 0.1 * mom.stddev);
  LdpResult ld = large_deviations(sys, h, delta, n_grid, samples, burn, opt.seed,
                                  opt.workers, mom.mean);
  csv::Table t({"n", "tail", "wilson_lo", "wilson_hi"});
  for (const auto& row : ld.rows)
    t.add_row(std::int64_t(row.n), row.tail, row.band.lo, row.band.hi);
  r.tables.emplace_back("ldp.csv", std::move(t));
  r.note("samples", std::int64_t(samples));
  r.note("mean_ref", ld.mean_ref);
  r.note("delta", ld.delta);
  r.note("observable_stddev", mom.stddev);
  r.check_true("deviation tail strictly decreasing", ld.strictly_decreasing);
  return r.finish();
}

int run_clt(const Options& opt) {
  Run r("clt", opt);
  SkewSystem sys = skew_for(r.cfg, 1e-2);
  const int n = int(get_int(r.cfg, "n", 10000));
  const int samples = int(get_int(r.cfg, "samples", 300));
  const int burn = int(get_int(r.cfg, "burn", 100));
  Observable h = observable_by_name(get_str(r.cfg, "observable", "x"), sys);
  CltResult clt = clt_check(sys, h, n, samples, burn, opt.seed, opt.workers);
  csv::Table t({"n", "samples", "ks", "sigma_hat", "degenerate"});
  t.add_row(std::int64_t(clt.n), std::int64_t(clt.samples), clt.ks, clt.sigma_hat,
            std::int64_t(clt.degenerate));
  r.tables.emplace_back("clt.csv", std::move(t));
  r.note("n", std::int64_t(n));
  r.note("samples", std::int64_t(samples));
  r.note("sigma_hat", clt.sigma_hat);
  r.check_true("normalized sums not degenerate", !clt.degenerate);
  r.check_le("KS distance of normalized sums vs standard normal", clt.ks,
             get_num(r.cfg, "ks_tol", 0.05));
  return r.finish();
}

int run_fibered(const Options& opt) {
  Run r("fibered", opt);
  FiberedSystem fsys = config::fibered_from_json(r.cfg);
  const int n = int(get_int(r.cfg, "n", 10000));
  const int samples = int(get_int(r.cfg, "samples", 20));
  AttractorInfo info = find_attractors(fsys.c);
  if (!info.found || !info.attracting)
    throw ConfigError("fibered: no attracting cycle for c = " +
                      csv::format_double(fsys.c));
  TrapRegion trap = build_trap(fsys, info);
  csv::Table tt({"piece", "lo", "hi"});
  for (std::size_t i = 0; i < trap.pieces.size(); ++i)
    tt.add_row(std::int64_t(i), trap.pieces[i].lo, trap.pieces[i].hi);
  r.tables.emplace_back("fibered_trap.csv", std::move(tt));
  r.note("c", fsys.c);
  r.note("epsilon", fsys.coupling.eps);
  r.note("cycle_period", std::int64_t(info.period));
  r.note("cycle_multiplier", info.multiplier);
  r.note("trap_radius", trap.radius);
  r.note("trap_lambda", trap.lambda);
  r.note("trap_margin", trap.margin);
  r.check_true("trap certified", trap.certified);
  if (trap.certified) {
    SrbSummary srb = srb_pushforward(fsys, trap, n, samples, opt.seed, opt.workers);
    csv::Table mt({"bin", "fraction"});
    for (std::size_t i = 0; i < srb.marginal.size(); ++i)
      mt.add_row(std::int64_t(i), srb.marginal[i]);
    r.tables.emplace_back("fibered_marginal.csv", std::move(mt));
    r.note("avg_y", srb.avg_y);
    r.note("avg_y2", srb.avg_y2);
    r.note("avg_xy", srb.avg_xy);
    r.note("exponent_mean", srb.exponent_mean);
    r.note("exponent_max", srb.exponent_max);
    r.note("pairing_disagreement", srb.pairing_disagreement);
    r.note("marginal_l1_uniform", srb.marginal_l1_uniform);
    r.check_le("trapped fiber exponent vs log lambda + 0.05", srb.exponent_max,
               std::log(trap.lambda) + 0.05);
    r.check_le("Birkhoff disagreement of paired starts", srb.pairing_disagreement,
               get_num(r.cfg, "pairing_tol", 1e-6));
    r.check_le("base marginal vs uniform (L1)", srb.marginal_l1_uniform,
               get_num(r.cfg, "marginal_tol", 0.02));
  }
  return r.finish();
}

int run_coexistence(const Options& opt) {
  Run r("coexistence", opt);
  CoexistenceConfig cfg;
  cfg.d = int(get_int(r.cfg, "d", cfg.d));
  cfg.branch = int(get_int(r.cfg, "branch", cfg.branch));
  cfg.a0 = get_num(r.cfg, "a0", cfg.a0);
  cfg.alpha = get_num(r.cfg, "alpha", cfg.alpha);
  cfg.target = get_num(r.cfg, "target", cfg.target);
  cfg.width = get_num(r.cfg, "width", cfg.width);
  cfg.n = int(get_int(r.cfg, "n", cfg.n));
  cfg.transient = int(get_int(r.cfg, "transient", cfg.transient));
  cfg.mc_n = int(get_int(r.cfg, "mc_n", cfg.mc_n));
  cfg.mc_samples = int(get_int(r.cfg, "mc_samples", cfg.mc_samples));
  cfg.seed = opt.seed;
  cfg.workers = opt.workers;
  CoexistenceReport rep = coexistence_demo(cfg);
  csv::Table t({"theta_star", "a_prime", "bump_amplitude", "bump_width", "bump_c3",
                "period", "multiplier", "central_exponent", "frac_positive",
                "mean_fiber_exponent"});
  t.add_row(rep.theta_star, rep.a_prime, rep.bump_amplitude, rep.bump_width,
            rep.bump_c3, std::int64_t(rep.period), rep.multiplier,
            rep.central_exponent, rep.frac_positive, rep.mean_fiber_exponent);
  r.tables.emplace_back("coexistence.csv", std::move(t));
  r.note("theta_star", rep.theta_star);
  r.note("a_prime", rep.a_prime);
  r.note("bump_c3", rep.bump_c3);
  r.note("cycle_period", std::int64_t(rep.period));
  r.note("cycle_multiplier", rep.multiplier);
  r.check_true("central fiber has an attracting cycle", rep.central_attracting);
  r.check_le("central fiber exponent", rep.central_exponent,
             get_num(r.cfg, "central_tol", -0.1));
  r.check_ge("fraction of positive random-fiber exponents", rep.frac_positive,
             get_num(r.cfg, "positive_tol", 0.95));
  return r.finish();
}

int run_verify(const Options& opt, const std::string& suite) {
  if (suite != "fast" && suite != "full")
    throw ConfigError("verify: unknown suite '" + suite + "' (use fast or full)");
  Run r("verify", opt);
  const bool fast = suite == "fast";
  std::vector<acceptance::CriterionResult> results =
      acceptance::run_battery(opt.seed, fast, opt.workers);
  csv::Table t({"criterion", "name", "check", "value", "bound", "relation", "pass"});
  for (const auto& cr : results) {
    for (const auto& ch : cr.checks)
      t.add_row(std::int64_t(cr.id), cr.name, ch.name, ch.value, ch.bound,
                ch.relation, std::int64_t(ch.pass));
    bool ok = cr.pass();
    std::printf("criterion %2d %-26s %s\n", cr.id, cr.name.c_str(),
                ok ? "PASS" : "FAIL");
    r.note("criterion_" + std::to_string(cr.id) + "_" + cr.name,
           std::string(ok ? "PASS" : "FAIL"));
    if (!ok) ++r.failed;
  }
  r.tables.emplace_back("verify_results.csv", std::move(t));
  r.note("suite", suite);
  return r.finish();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for quadratic skew-products over expanding "
               "Markov interval maps"};
  app.require_subcommand(1);

  Options opt;
  std::vector<double> ladder;
  std::vector<int> n_grid;
  int samples = 200;
  std::string suite = "fast";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON config file");
    sub->add_option("--seed", opt.seed, "RNG seed");
    sub->add_option("--workers", opt.workers, "worker threads (never affects output)");
    sub->add_option("--out", opt.out_dir, "output directory");
    return sub;
  };

  auto* c_curves = add_common(app.add_subcommand(
      "curves", "push admissible curves; slopes, curvature, strips"));
  auto* c_rec = add_common(app.add_subcommand(
      "recurrence", "deep-return tail and stopping-time tails"));
  c_rec->add_option("--alpha-ladder", ladder, "alpha rungs for the onset table")
      ->delimiter(',');
  c_rec->add_option("--n-grid", n_grid, "horizons for the stopping-time tails")
      ->delimiter(',');
  c_rec->add_option("--samples", samples, "Monte Carlo samples per table");
  auto* c_ly = add_common(app.add_subcommand(
      "lyapunov", "Monte Carlo fiber/base/generic exponents"));
  auto* c_den = add_common(app.add_subcommand(
      "density", "empirical invariant density on a grid"));
  auto* c_corr = add_common(app.add_subcommand(
      "correlations", "autocorrelations of an observable"));
  auto* c_ldp = add_common(app.add_subcommand(
      "ldp", "large-deviation tail of Birkhoff averages"));
  auto* c_clt = add_common(app.add_subcommand(
      "clt", "normalized Birkhoff sums against the normal law"));
  auto* c_fib = add_common(app.add_subcommand(
      "fibered", "contracting-fiber skew product: trap, SRB, pairing"));
  auto* c_co = add_common(app.add_subcommand(
      "coexistence", "attracting central fiber amid positive exponents"));
  auto* c_ver = add_common(app.add_subcommand(
      "verify", "run the acceptance battery"));
  c_ver->add_option("--suite", suite, "fast or full");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(c_curves)) return run_curves(opt);
    if (app.got_subcommand(c_rec)) return run_recurrence(opt, ladder, n_grid, samples);
    if (app.got_subcommand(c_ly)) return run_lyapunov(opt);
    if (app.got_subcommand(c_den)) return run_density(opt);
    if (app.got_subcommand(c_corr)) return run_correlations(opt);
    if (app.got_subcommand(c_ldp)) return run_ldp(opt);
    if (app.got_subcommand(c_clt)) return run_clt(opt);
    if (app.got_subcommand(c_fib)) return run_fibered(opt);
    if (app.got_subcommand(c_co)) return run_coexistence(opt);
    if (app.got_subcommand(c_ver)) return run_verify(opt, suite);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ContractError& e) {
    std::fprintf(stderr, "contract failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
