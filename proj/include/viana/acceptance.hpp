#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "viana/config.hpp"
#include "viana/csv.hpp"
#include "viana/curves.hpp"
#include "viana/fibered.hpp"
#include "viana/recurrence.hpp"
#include "viana/statistics.hpp"

namespace viana::acceptance {

/// One measured quantity with its contract.
struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  std::string relation;  // "<=", ">=", "=0", "info"
  bool pass = true;
};

inline Check le(std::string name, double value, double bound) {
  return {std::move(name), value, bound, "<=", value <= bound};
}
inline Check ge(std::string name, double value, double bound) {
  return {std::move(name), value, bound, ">=", value >= bound};
}
inline Check eq0(std::string name, double value) {
  return {std::move(name), value, 0.0, "=0", value == 0.0};
}
inline Check truthy(std::string name, bool ok) {
  return {std::move(name), ok ? 1.0 : 0.0, 1.0, ">=", ok};
}
inline Check info(std::string name, double value) {
  return {std::move(name), value, 0.0, "info", true};
}

struct CriterionResult {
  int id = 0;
  std::string name;
  std::vector<Check> checks;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

/// Reference systems used across the battery.
inline SkewSystem reference_system(double alpha) {
  VianaParams p{BaseMap::uniform_linear(16), find_misiurewicz(), alpha, std::nullopt};
  return SkewSystem::make(std::move(p));
}
inline SkewSystem control_system() {
  VianaParams p{BaseMap::uniform_linear(16), 2.0, 0.0, std::nullopt};
  return SkewSystem::make(std::move(p));
}

// --- 1: admissible curves stay admissible under one push -------------------

inline CriterionResult curve_class_preservation(std::uint64_t seed, bool fast) {
  const int curves = fast ? 20 : 100;
  const int grid = fast ? 20000 : 100000;
  SkewSystem sys = reference_system(1e-3);
  const double alpha = sys.alpha();
  const double dy_bound = (kTwoPi + 4.0) * alpha / 16.0;
  rng::Stream s(seed, 1001);
  double worst_dy = 0, worst_d2y = 0;
  for (int i = 0; i < curves; ++i) {
    AdmissibleCurve c = AdmissibleCurve::random(s, sys.trap(), alpha);
    for (int b = 0; b < sys.base().branch_count(); ++b) {
      PushedCurve pc = push_curve(sys, c, b, grid);
      worst_dy = std::max(worst_dy, pc.max_dy);
      worst_d2y = std::max(worst_d2y, pc.max_d2y);
    }
  }
  CriterionResult r{1, "curve-class-preservation", {}};
  r.checks.push_back(le("max |Y1'| vs (2pi+4) alpha/16", worst_dy, dy_bound * (1 + 1e-12)));
  r.checks.push_back(le("max |Y1''| vs alpha", worst_d2y, alpha * (1 + 1e-12)));
  return r;
}

// --- 2: slope/curvature dichotomy on source-parametrized pushes ------------

inline CriterionResult transversality_dichotomy(std::uint64_t seed, bool fast) {
  const int curves = fast ? 20 : 100;
  const int grid = fast ? 20000 : 100000;
  SkewSystem sys = reference_system(1e-3);
  rng::Stream s(seed, 1001);  // the same curve family as criterion 1
  double min_margin = 1e300;
  std::int64_t violations = 0;
  for (int i = 0; i < curves; ++i) {
    AdmissibleCurve c = AdmissibleCurve::random(s, sys.trap(), sys.alpha());
    TransversalityReport t = transversality_check(sys, c, grid);
    min_margin = std::min(min_margin, t.margin);
    violations += std::int64_t(t.violations);
  }
  CriterionResult r{2, "transversality-dichotomy", {}};
  r.checks.push_back(eq0("nodes with |Y1'| < alpha/2 and |Y1''| < 4 alpha", double(violations)));
  r.checks.push_back(ge("worst dichotomy margin", min_margin, 0.0));
  return r;
}

// --- 3: horizontal strip measures against the declared bounds --------------

inline CriterionResult strip_measure_bounds(std::uint64_t seed, bool fast) {
  const int triples = fast ? 150 : 1000;
  const int grid = fast ? 16384 : 65536;
  SkewSystem sys = reference_system(1e-3);
  const double alpha = sys.alpha();
  rng::Stream s(seed, 1003);
  std::int64_t violations = 0, inapplicable = 0;
  double worst_ratio = 0;
  for (int i = 0; i < triples; ++i) {
    AdmissibleCurve c = AdmissibleCurve::random(s, sys.trap(), alpha);
    int j = 1 + int(s.below(5));
    double len = alpha * std::pow(10.0, s.uniform(-2.0, 0.0));
    double center = s.uniform(sys.trap().lo, sys.trap().hi);
    StripMeasure sm = strip_measure(sys, c, j, {center - len / 2, center + len / 2}, grid);
    if (!sm.bound_applicable) {
      ++inapplicable;
      continue;
    }
    double cap = sm.bound + sm.grid_band;
    if (sm.estimate > cap) ++violations;
    if (cap > 0) worst_ratio = std::max(worst_ratio, sm.estimate / cap);
  }
  CriterionResult r{3, "strip-measure-bounds", {}};
  r.checks.push_back(eq0("strips exceeding bound + grid band", double(violations)));
  r.checks.push_back(eq0("triples outside the bound's validity", double(inapplicable)));
  r.checks.push_back(info("worst estimate/(bound+band)", worst_ratio));
  return r;
}

// --- 4: distortion ratios and cylinder masses -------------------------------

inline CriterionResult distortion_gibbs(std::uint64_t seed, bool fast) {
  CriterionResult r{4, "distortion-gibbs", {}};
  const int sampled = fast ? 512 : 2048;

  BaseMap lin = BaseMap::uniform_linear(16);
  double worst_gibbs = 0, worst_mass = 0, worst_ratio = 0;
  auto probe_lin = [&](const Itinerary& it) {
    Interval c = lin.cylinder(it);
    double n = double(it.size());
    worst_mass = std::max(worst_mass, std::abs(c.length() * std::pow(16.0, n) - 1.0));
    worst_gibbs = std::max(worst_gibbs, std::abs(lin.gibbs_ratio(it) - 1.0));
    double t1 = c.lo + 0.25 * c.length(), t2 = c.lo + 0.75 * c.length();
    worst_ratio = std::max(worst_ratio,
                           std::abs(lin.distortion_ratio(t1, t2, int(it.size())) - 1.0));
  };
  Itinerary it;
  for (int a = 0; a < 16; ++a) {
    it = {a};
    probe_lin(it);
    for (int b = 0; b < 16; ++b) {
      it = {a, b};
      probe_lin(it);
      for (int c = 0; c < 16; ++c) {
        it = {a, b, c};
        probe_lin(it);
      }
    }
  }
  rng::Stream s(seed, 1004);
  for (int n = 4; n <= 6; ++n) {
    for (int k = 0; k < sampled; ++k) {
      auto v = Itinerary(std::size_t(n));
      for (int j = 0; j < n; ++j) v[std::size_t(j)] = int(s.below(16));
      probe_lin(v);
    }
  }
  r.checks.push_back(le("linear base: max |16^n Leb(cyl) - 1|", worst_mass, 1e-12));
  r.checks.push_back(le("linear base: max |Gibbs ratio - 1|", worst_gibbs, 1e-12));
  r.checks.push_back(le("linear base: max |distortion - 1|", worst_ratio, 1e-12));

  BaseMap pert = BaseMap::perturbed_linear(16, 1e-3);
  double K_grid = pert.renyi_constant(512);
  double K_analytic = pert.renyi_constant_analytic();
  double pert_bound = BaseMap::renyi_perturbation_bound(16.0, 0.0, 1e-3);
  double band = BaseMap::distortion_band(pert.expansion_floor(), K_analytic);
  double worst_hi = 1.0, worst_lo = 1.0;
  for (int n = 1; n <= 6; ++n) {
    for (int k = 0; k < sampled / 2; ++k) {
      auto v = Itinerary(std::size_t(n));
      for (int j = 0; j < n; ++j) v[std::size_t(j)] = int(s.below(16));
      double g = pert.gibbs_ratio(v);
      Interval c = pert.cylinder(v);
      double d = pert.distortion_ratio(c.lo + 0.25 * c.length(),
                                       c.lo + 0.75 * c.length(), n);
      worst_hi = std::max({worst_hi, g, d});
      worst_lo = std::min({worst_lo, g, d});
    }
  }
  r.checks.push_back(le("perturbed base: grid Renyi constant vs analytic",
                        K_grid, K_analytic * (1 + 1e-9)));
  r.checks.push_back(le("perturbed base: Renyi constant vs perturbation bound",
                        K_analytic, pert_bound));
  r.checks.push_back(le("perturbed base: Gibbs/distortion upper vs band", worst_hi, band));
  r.checks.push_back(ge("perturbed base: Gibbs/distortion lower vs band", worst_lo, 1.0 / band));
  return r;
}

// --- 5: two-collection displacement with mass control -----------------------

inline CriterionResult displacement_partitions_hold(std::uint64_t seed, bool fast) {
  const int curves = fast ? 20 : 100;
  SkewSystem sys = reference_system(1e-3);
  rng::Stream s(seed, 1005);
  int failures = 0;
  double min_sep = 1e300, min_mass = 1e300;
  for (int i = 0; i < curves; ++i) {
    AdmissibleCurve c = AdmissibleCurve::random(s, sys.trap(), sys.alpha());
    Displacement d = displacement_partitions(sys, c);
    if (!d.ok) ++failures;
    min_sep = std::min(min_sep, d.separation);
    min_mass = std::min(min_mass, std::min(d.mass_low, d.mass_high));
  }
  CriterionResult r{5, "displacement-partitions", {}};
  r.checks.push_back(eq0("curves without a valid partition", double(failures)));
  r.checks.push_back(ge("min separation vs alpha/100", min_sep, sys.alpha() / 100.0));
  r.checks.push_back(ge("min collection mass vs 1/16", min_mass, 1.0 / 16.0));
  return r;
}

// --- 6: tail of deep returns over the window depth ---------------------------

inline CriterionResult deep_return_tail_shape(std::uint64_t, bool fast) {
  const int grid = fast ? 65536 : 262144;
  SkewSystem sys = reference_system(1e-2);
  AdmissibleCurve crit = AdmissibleCurve::constant(std::sqrt(sys.a0()), sys.alpha());
  std::vector<DeepTailRow> rows = deep_return_tail(sys, crit, 2, 8, grid);

  bool nonincreasing = true;
  double worst_excess = 0;
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (k > 0 && rows[k].band.lo > rows[k - 1].band.hi) nonincreasing = false;
    worst_excess = std::max(worst_excess,
                            rows[k].measure - std::min(1.0, rows[k].bound));
    if (rows[k].measure > 0 && rows[k].measure < 1.0 && !rows[k].below_range) {
      xs.push_back(double(rows[k].r));
      ys.push_back(std::log(rows[k].measure));
    }
  }
  LineFit fit = fit_line(xs, ys);
  CriterionResult r{6, "deep-return-tail", {}};
  r.checks.push_back(truthy("measures nonincreasing within Wilson bands", nonincreasing));
  r.checks.push_back(le("max measure minus strip bound", worst_excess, 0.0));
  r.checks.push_back(ge("resolved rows in the log fit", double(fit.points), 3.0));
  r.checks.push_back(le("log-measure slope over depth", fit.slope, -0.2));
  return r;
}

// --- 7: positive fiber exponents at reference parameters --------------------

inline CriterionResult positive_fiber_exponents(std::uint64_t seed, bool fast,
                                                unsigned workers) {
  const int n = fast ? 2000 : 10000;
  const int samples = fast ? 200 : 1000;
  SkewSystem sys = reference_system(1e-2);
  ExponentSummary ly = lyapunov_mc(sys, n, samples, seed, workers);
  int above = 0;
  for (double f : ly.fiber) above += f > 0.05 ? 1 : 0;
  ExponentSummary ctl = lyapunov_mc(control_system(), n, fast ? 50 : 200, seed, workers);

  CriterionResult r{7, "positive-fiber-exponents", {}};
  r.checks.push_back(ge("fraction of fiber exponents > 0.05",
                        double(above) / double(samples), 0.99));
  r.checks.push_back(le("max |base exponent - log 16|", ly.max_base_dev, 1e-3));
  r.checks.push_back(le("control |mean fiber exponent - log 2|",
                        std::abs(ctl.mean_fiber - std::log(2.0)), 0.02));
  r.checks.push_back(info("mean fiber exponent", ly.mean_fiber));
  return r;
}

// --- 8: stopping-time tails decay ------------------------------------------

inline CriterionResult stopping_time_tails(std::uint64_t seed, bool fast,
                                           unsigned workers) {
  SkewSystem sys = reference_system(1e-2);
  ExponentSummary ly = lyapunov_mc(sys, fast ? 2000 : 10000, 200, seed + 801, workers);
  double lam = ly.mean_fiber;

  rng::Stream s(seed, 802);
  Point z = sys.random_point(s);
  double delta = std::sqrt(sys.alpha());
  double B = 0;
  const int rate_steps = fast ? 50000 : 200000;
  for (int j = 0; j < rate_steps; ++j) {
    double ax = std::abs(z.x);
    if (ax < delta && ax > 0) B += -std::log(ax);
    z = sys.step(z);
  }
  double rate = B / double(rate_steps);

  std::vector<int> grid = fast ? std::vector<int>{100, 400, 1600}
                               : std::vector<int>{100, 1000, 10000};
  StoppingTails st = expansion_time_tails(sys, 0.95 * lam, 1.10 * rate, delta, grid,
                                          fast ? 150 : 400, seed, workers);
  bool mono = true;
  for (std::size_t k = 1; k < st.rows.size(); ++k) {
    if (st.rows[k].tail_expansion > st.rows[k - 1].tail_expansion) mono = false;
    if (st.rows[k].tail_recurrence > st.rows[k - 1].tail_recurrence) mono = false;
  }
  CriterionResult r{8, "stopping-time-tails", {}};
  r.checks.push_back(truthy("tails nonincreasing over the horizon grid", mono));
  r.checks.push_back(ge("expansion-tail fit points", double(st.fit_expansion.points), 2.0));
  r.checks.push_back(le("expansion log-tail slope vs sqrt(n)", st.fit_expansion.slope, -1e-4));
  r.checks.push_back(ge("recurrence-tail fit points", double(st.fit_recurrence.points), 2.0));
  r.checks.push_back(le("recurrence log-tail slope vs sqrt(n)", st.fit_recurrence.slope, -1e-4));
  r.checks.push_back(info("expansion threshold c", st.c_target));
  r.checks.push_back(info("recurrence budget eps", st.eps));
  return r;
}

// --- 9: invariant density, correlations, deviations, normal fluctuations ----

inline CriterionResult limit_laws(std::uint64_t seed, bool fast, unsigned workers) {
  CriterionResult r{9, "limit-laws", {}};

  SkewSystem ctl = control_system();
  DensityGrid dg = invariant_density(ctl, fast ? 20 : 50, fast ? 10000 : 40000, 100,
                                     1, 64, seed, workers);
  double l1 = l1_distance(dg.x_marginal(), chebyshev_bin_masses(64, ctl.trap()));
  r.checks.push_back(le("control fiber marginal vs arcsine law (L1)", l1, 0.05));

  SkewSystem sys = reference_system(1e-2);
  CorrelationTable ct = correlation_decay(sys, observable_x(), observable_x(), 64,
                                          fast ? 20 : 50, fast ? 8000 : 20000, 200,
                                          seed, workers);
  double late = 0;
  for (std::size_t l = 50; l < ct.rows.size(); ++l)
    late = std::max(late, std::abs(ct.rows[l].corr));
  r.checks.push_back(le("max |autocorrelation| over lags >= 50", late, 0.05));
  r.checks.push_back(truthy("log |corr| decreases against sqrt(lag)", ct.decays));

  Moments mom = observable_moments(sys, observable_x(), 1000000, 100, seed, 2007);
  LdpResult ld = large_deviations(sys, observable_x(), 0.1 * mom.stddev,
                                  {16, 32, 64, 128}, fast ? 500 : 2000, 100, seed,
                                  workers, mom.mean);
  r.checks.push_back(truthy("deviation tail strictly decreasing", ld.strictly_decreasing));
  r.checks.push_back(ge("deviation tail positive at the last rung",
                        ld.rows.back().tail, 1e-12));

  CltResult clt = clt_check(sys, observable_x(), fast ? 2000 : 10000,
                            fast ? 300 : 1000, 100, seed, workers);
  r.checks.push_back(truthy("normalized sums not degenerate", !clt.degenerate));
  r.checks.push_back(le("KS distance of normalized sums", clt.ks, 0.05));
  return r;
}

// --- 10: fibered contraction, uniqueness, and marginal ----------------------

inline CriterionResult fibered_contraction(std::uint64_t seed, bool fast,
                                           unsigned workers) {
  CriterionResult r{10, "fibered-contraction", {}};
  AttractorInfo info = find_attractors(0.5);
  FiberedSystem fs{BaseMap::uniform_linear(16), 0.5, Coupling::sine(0.01)};
  TrapRegion trap = build_trap(fs, info);
  r.checks.push_back(truthy("trap certified at epsilon = 0.01", trap.certified));
  r.checks.push_back(le("certified contraction factor", trap.lambda, 1.0 - 1e-9));

  SrbSummary srb = srb_pushforward(fs, trap, 10000, fast ? 40 : 50, seed, workers);
  r.checks.push_back(le("worst trapped fiber exponent vs log lambda + 0.05",
                        srb.exponent_max, std::log(trap.lambda) + 0.05));
  r.checks.push_back(le("Birkhoff disagreement of paired starts",
                        srb.pairing_disagreement, 1e-6));
  r.checks.push_back(le("base marginal vs uniform (L1)", srb.marginal_l1_uniform, 0.02));

  FiberedSystem fs0{BaseMap::uniform_linear(16), 0.5, Coupling::none()};
  TrapRegion trap0 = build_trap(fs0, info);
  FiberExponent fe = fiber_exponent(fs0, trap0, 0.5, trap0.pieces.front().mid(), 2000);
  r.checks.push_back(truthy("uncoupled exponent applicable", fe.applicable));
  r.checks.push_back(le("|uncoupled exponent + 0.3124|",
                        std::abs(fe.value + 0.3124), 0.02));

  rng::Stream s(seed, 1010);
  std::int64_t exits = 0;
  const int orbits = fast ? 20 : 100;
  const int steps = fast ? 5000 : 10000;
  for (int i = 0; i < orbits; ++i) {
    double x = s.open_unit();
    double y = s.uniform(trap.pieces.front().lo, trap.pieces.front().hi);
    for (int j = 0; j < steps; ++j) {
      double xn = fs.base.eval(x);
      y = fs.step_y(x, y);
      x = xn;
      if (!trap.contains(y)) ++exits;
    }
  }
  r.checks.push_back(eq0("trapped steps leaving the trap", double(exits)));
  return r;
}

// --- 11: attracting central fiber amid positive exponents -------------------

inline CriterionResult coexistence_window(std::uint64_t seed, bool fast,
                                          unsigned workers) {
  CoexistenceConfig cfg;
  cfg.seed = seed;
  cfg.workers = workers;
  if (fast) {
    cfg.n = 4096;
    cfg.mc_n = 2000;
    cfg.mc_samples = 100;
  }
  CoexistenceReport rep = coexistence_demo(cfg);
  CriterionResult r{11, "coexistence-window", {}};
  r.checks.push_back(truthy("central fiber has an attracting cycle", rep.central_attracting));
  r.checks.push_back(le("central fiber exponent", rep.central_exponent, -0.1));
  r.checks.push_back(ge("fraction of random fibers with positive exponent",
                        rep.frac_positive, 0.95));
  r.checks.push_back(info("measured C3 size of the fiber bump", rep.bump_c3));
  r.checks.push_back(info("attracting cycle multiplier", rep.multiplier));
  return r;
}

// --- 12: identical outputs regardless of worker count -----------------------

inline CriterionResult deterministic_outputs(std::uint64_t seed, bool fast) {
  auto render = [&](unsigned workers) {
    SkewSystem sys = reference_system(1e-2);
    ExponentSummary ly = lyapunov_mc(sys, fast ? 500 : 2000, 64, seed, workers);
    csv::Table t({"sample", "fiber", "base", "generic"});
    for (std::size_t i = 0; i < ly.fiber.size(); ++i)
      t.add_row(std::int64_t(i), ly.fiber[i], ly.base[i], ly.generic[i]);
    DensityGrid dg = invariant_density(sys, 8, 2000, 50, 16, 16, seed, workers);
    csv::Table d({"cell", "count"});
    for (std::size_t i = 0; i < dg.counts.size(); ++i)
      d.add_row(std::int64_t(i), std::int64_t(dg.counts[i]));
    return t.to_string() + d.to_string();
  };
  std::string one = render(1);
  std::string eight = render(8);
  CriterionResult r{12, "deterministic-outputs", {}};
  r.checks.push_back(truthy("workers 1 vs 8 render byte-identical tables", one == eight));
  return r;
}

/// The full battery.  The test suite re-validates criterion 12 from outside
/// by running the CLI twice and comparing the files it writes.
inline std::vector<CriterionResult> run_battery(std::uint64_t seed, bool fast,
                                                unsigned workers) {
  std::vector<CriterionResult> out;
  out.push_back(curve_class_preservation(seed, fast));
  out.push_back(transversality_dichotomy(seed, fast));
  out.push_back(strip_measure_bounds(seed, fast));
  out.push_back(distortion_gibbs(seed, fast));
  out.push_back(displacement_partitions_hold(seed, fast));
  out.push_back(deep_return_tail_shape(seed, fast));
  out.push_back(positive_fiber_exponents(seed, fast, workers));
  out.push_back(stopping_time_tails(seed, fast, workers));
  out.push_back(limit_laws(seed, fast, workers));
  out.push_back(fibered_contraction(seed, fast, workers));
  out.push_back(coexistence_window(seed, fast, workers));
  out.push_back(deterministic_outputs(seed, fast));
  return out;
}

}  // namespace viana::acceptance
