#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "viana/curves.hpp"
#include "viana/parallel.hpp"
#include "viana/rng.hpp"
#include "viana/skew.hpp"
#include "viana/util.hpp"

namespace viana {

/// Critical window J(r) = [-sqrt(alpha) e^{-r}, sqrt(alpha) e^{-r}].
inline Interval critical_window(double alpha, int r) {
  if (alpha <= 0) throw ConfigError("critical_window: need alpha > 0");
  double h = std::sqrt(alpha) * std::exp(-double(r));
  return {-h, h};
}

/// Maximal M >= 0 with 32^M alpha <= 1.
inline int m_of_alpha(double alpha) {
  if (alpha <= 0 || alpha > 1) throw ConfigError("m_of_alpha: need alpha in (0,1]");
  int m = int(std::floor(std::log(1.0 / alpha) / std::log(32.0)));
  while (std::pow(32.0, double(m + 1)) * alpha <= 1.0) ++m;
  while (m > 0 && std::pow(32.0, double(m)) * alpha > 1.0) --m;
  return m;
}

/// Return depth: r such that x lies in J(r) \ J(r+1), clamped to m for deep
/// returns (x in J(m)); -1 when |x| > sqrt(alpha) (no return at all).
inline int depth_of(double x, double alpha, int m) {
  double s = std::sqrt(alpha);
  double ax = std::abs(x);
  if (ax > s) return -1;
  if (ax <= s * std::exp(-double(m))) return m;
  return int(std::floor(std::log(s / ax)));
}

struct ReturnRecord {
  int nu = 0;        // step index, 1..n
  double x = 0.0;
  int depth = 0;
  bool deep = false;
};

struct ReturnSummary {
  std::vector<ReturnRecord> records;
  int m = 0;
  int deep_count = 0;
  double depth_threshold = 0.0;  // (1/2 - eta) log(1/alpha)
  double heavy_sum = 0.0;        // sum of depths >= threshold over regular returns
};

/// Classifies the returns x_nu in J(0) along the first n steps of the orbit,
/// with m = floor(sqrt(n)) as the deep/regular cut.
inline ReturnSummary classify_returns(const SkewSystem& sys, Point z, int n,
                                      double eta = 0.1) {
  double alpha = sys.alpha();
  if (alpha <= 0) throw ConfigError("classify_returns: need alpha > 0");
  ReturnSummary out;
  out.m = int(std::floor(std::sqrt(double(n))));
  out.depth_threshold = (0.5 - eta) * std::log(1.0 / alpha);
  for (int nu = 1; nu <= n; ++nu) {
    z = sys.step(z);
    int r = depth_of(z.x, alpha, out.m);
    if (r < 0) continue;
    bool deep = (r == out.m);
    out.records.push_back({nu, z.x, r, deep});
    if (deep) {
      ++out.deep_count;
    } else if (double(r) >= out.depth_threshold) {
      out.heavy_sum += double(r);
    }
  }
  return out;
}

struct HeavyFractionRow {
  int n = 0;
  double fraction = 0.0;  // samples with heavy_sum >= c n
  WilsonBand band;
};

/// Fraction of Lebesgue-random orbits whose heavy-depth sum exceeds c n,
/// reported for each horizon in n_grid.
inline std::vector<HeavyFractionRow> heavy_fraction(
    const SkewSystem& sys, const std::vector<int>& n_grid, int samples, double c,
    double eta, std::uint64_t seed, unsigned workers) {
  std::vector<HeavyFractionRow> rows;
  for (int n : n_grid) {
    std::vector<char> hit(std::size_t(samples), 0);
    for_each_sample(std::size_t(samples), workers, [&](std::size_t i) {
      rng::Stream s(seed, i);
      ReturnSummary sum = classify_returns(sys, sys.random_point(s), n, eta);
      hit[i] = sum.heavy_sum >= c * double(n) ? 1 : 0;
    });
    int k = 0;
    for (char h : hit) k += h;
    rows.push_back({n, double(k) / double(samples),
                    wilson_interval(double(k), double(samples))});
  }
  return rows;
}

struct OnsetResult {
  double alpha = 0.0;
  int n_hat = 0;          // smallest observed first-return time to J(0)
  double eta_fit = 0.0;   // worst-case derivative-product exponent, in (0, 1/3]
  int resolved = 0;       // samples whose first return occurred within the cap
  bool censored = false;  // true when no sample returned within the cap
};

/// Hyperbolicity onset: samples start in the band |x| <= 2 sqrt(alpha) and
/// run until the first return to J(0).  Along the pre-return segment the
/// fiber derivative product P satisfies P = |x_return| alpha^{-(1-eta)};
/// eta_fit reports the worst sample exponent.
inline OnsetResult n_of_alpha(const SkewSystem& sys, int samples,
                              std::uint64_t seed, int cap = 100000,
                              unsigned workers = 1) {
  double alpha = sys.alpha();
  if (alpha <= 0) throw ConfigError("n_of_alpha: need alpha > 0");
  double s0 = std::sqrt(alpha);
  OnsetResult out;
  out.alpha = alpha;
  std::vector<int> tau(std::size_t(samples), -1);
  std::vector<double> eta(std::size_t(samples), 1.0);
  for_each_sample(std::size_t(samples), workers, [&](std::size_t i) {
    rng::Stream s(seed, i);
    double theta = s.open_unit();
    double x = s.uniform(-2.0 * s0, 2.0 * s0);
    double logp = 0.0;
    for (int j = 1; j <= cap; ++j) {
      logp += std::log(std::abs(2.0 * x));
      double xn = sys.fiber_value(theta, x);
      theta = sys.base().eval(theta);
      x = xn;
      if (std::abs(x) < s0) {
        tau[i] = j;
        eta[i] = 1.0 - (logp - std::log(std::abs(x))) / std::log(1.0 / alpha);
        break;
      }
    }
  });
  int best = cap + 1;
  double worst_eta = 1.0 / 3.0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (tau[i] < 0) continue;
    ++out.resolved;
    best = std::min(best, tau[i]);
    worst_eta = std::min(worst_eta, eta[i]);
  }
  out.censored = out.resolved == 0;
  out.n_hat = out.censored ? cap + 1 : best;
  out.eta_fit = std::min(1.0 / 3.0, std::max(1e-6, worst_eta));
  return out;
}

struct OnsetLadder {
  std::vector<OnsetResult> rows;
  double k0 = 0.0;  // min n_hat / log(1/alpha)
  double k1 = 0.0;  // max n_hat / log(1/alpha)
};

/// Runs the onset experiment over an alpha ladder (prototype parameters are
/// rebuilt per rung) and brackets n_hat between k0 log(1/alpha) and
/// k1 log(1/alpha).
inline OnsetLadder n_of_alpha_ladder(const VianaParams& proto,
                                     const std::vector<double>& alphas,
                                     int samples, std::uint64_t seed,
                                     int cap = 100000, unsigned workers = 1) {
  OnsetLadder out;
  out.k0 = 1e300;
  out.k1 = 0;
  for (double a : alphas) {
    VianaParams p = proto;
    p.alpha = a;
    SkewSystem sys = SkewSystem::make(std::move(p));
    OnsetResult r = n_of_alpha(sys, samples, seed, cap, workers);
    double ratio = double(r.n_hat) / std::log(1.0 / a);
    out.k0 = std::min(out.k0, ratio);
    out.k1 = std::max(out.k1, ratio);
    out.rows.push_back(r);
  }
  return out;
}

struct DeepTailRow {
  int r = 0;
  double measure = 0.0;
  double bound = 0.0;  // strip bound C sqrt(|J(r-2)|/alpha)
  WilsonBand band;
  bool below_range = false;  // r < (1/2 - 2 eta) log(1/alpha)
  bool censored = false;     // no grid segment met the window
};

/// Lebesgue measure of {theta : x_M(theta) in J(r-2)} for the curve pushed
/// M = m_of_alpha(alpha) steps, tabulated over r.  The fiber values are
/// computed once on the grid and each window is measured by linear
/// interpolation between nodes.
inline std::vector<DeepTailRow> deep_return_tail(const SkewSystem& sys,
                                                 const AdmissibleCurve& curve,
                                                 int r_lo, int r_hi,
                                                 int grid = 1000000,
                                                 double eta = 0.1) {
  double alpha = sys.alpha();
  if (alpha <= 0) throw ConfigError("deep_return_tail: need alpha > 0");
  if (r_hi < r_lo) throw ConfigError("deep_return_tail: bad r range");
  int M = m_of_alpha(alpha);
  const BaseMap& g = sys.base();
  double K = g.renyi_constant_analytic();
  double C = 6.0 * BaseMap::distortion_band(g.expansion_floor(), K);
  double r_min = (0.5 - 2.0 * eta) * std::log(1.0 / alpha);

  std::vector<double> vals(std::size_t(grid), 0.0);
  for (int k = 1; k <= grid; ++k) {
    double theta = double(k) / double(grid);
    double x = curve.at(theta).y;
    double t = theta;
    for (int step = 0; step < M; ++step) {
      double xn = sys.fiber_value(t, x);
      t = g.eval(t);
      x = xn;
    }
    vals[std::size_t(k - 1)] = x;
  }

  std::vector<DeepTailRow> rows;
  double dx = 1.0 / double(grid);
  for (int r = r_lo; r <= r_hi; ++r) {
    Interval J = critical_window(alpha, r - 2);
    double acc = 0;
    if (J.contains(vals[0])) acc += dx;
    for (std::size_t k = 1; k < vals.size(); ++k) {
      double lo = std::min(vals[k - 1], vals[k]);
      double hi = std::max(vals[k - 1], vals[k]);
      double overlap = std::min(hi, J.hi) - std::max(lo, J.lo);
      if (overlap > 0) acc += (hi > lo) ? dx * std::min(1.0, overlap / (hi - lo)) : dx;
    }
    DeepTailRow row;
    row.r = r;
    row.measure = acc;
    row.bound = C * std::sqrt(J.length() / alpha);
    row.band = wilson_interval(acc * double(grid), double(grid));
    row.below_range = double(r) < r_min;
    row.censored = acc == 0.0;
    rows.push_back(row);
  }
  return rows;
}

struct BranchRange {
  int branch = 0;
  double inf = 0.0;
  double sup = 0.0;
  double mass = 0.0;
};

struct Displacement {
  std::vector<BranchRange> ranges;
  std::vector<int> low_branches;   // sup <= threshold
  std::vector<int> high_branches;  // inf >= threshold + alpha/100
  double separation = 0.0;         // min inf(high) - max sup(low)
  double mass_low = 0.0;
  double mass_high = 0.0;
  bool ok = false;  // both masses in [1/16, 15/16]
};

/// Splits the branch set into two collections whose one-step pushed curve
/// segments are vertically separated by at least alpha/100, maximizing the
/// smaller collection mass.  Branches straddling the gap stay unassigned.
inline Displacement displacement_partitions(const SkewSystem& sys,
                                            const AdmissibleCurve& curve,
                                            int grid_per_branch = 512) {
  double alpha = sys.alpha();
  if (alpha <= 0) throw ConfigError("displacement_partitions: need alpha > 0");
  const BaseMap& g = sys.base();
  Displacement out;
  for (int i = 0; i < g.branch_count(); ++i) {
    Interval w = g.partition().branch_interval(i);
    BranchRange r;
    r.branch = i;
    r.mass = w.length();
    r.inf = 1e300;
    r.sup = -1e300;
    for (int k = 0; k <= grid_per_branch; ++k) {
      double theta = w.lo + w.length() * double(k) / double(grid_per_branch);
      double v = source_push_jet(sys, theta, curve.at(theta)).y;
      r.inf = std::min(r.inf, v);
      r.sup = std::max(r.sup, v);
    }
    out.ranges.push_back(r);
  }
  double gap = alpha / 100.0;
  double best = -1;
  double best_t = 0;
  for (const auto& cand : out.ranges) {
    double t = cand.sup;
    double mlo = 0, mhi = 0;
    for (const auto& r : out.ranges) {
      if (r.sup <= t) mlo += r.mass;
      else if (r.inf >= t + gap) mhi += r.mass;
    }
    double score = std::min(mlo, mhi);
    if (score > best) {
      best = score;
      best_t = t;
    }
  }
  double max_sup_low = -1e300, min_inf_high = 1e300;
  for (const auto& r : out.ranges) {
    if (r.sup <= best_t) {
      out.low_branches.push_back(r.branch);
      out.mass_low += r.mass;
      max_sup_low = std::max(max_sup_low, r.sup);
    } else if (r.inf >= best_t + gap) {
      out.high_branches.push_back(r.branch);
      out.mass_high += r.mass;
      min_inf_high = std::min(min_inf_high, r.inf);
    }
  }
  out.separation = min_inf_high - max_sup_low;
  out.ok = out.mass_low >= 1.0 / 16 && out.mass_low <= 15.0 / 16 &&
           out.mass_high >= 1.0 / 16 && out.mass_high <= 15.0 / 16 &&
           out.separation >= gap;
  return out;
}

struct StoppingTailRow {
  int n = 0;
  double tail_expansion = 0.0;   // fraction with E > n
  double tail_recurrence = 0.0;  // fraction with R > n
  WilsonBand band_expansion;
  WilsonBand band_recurrence;
};

struct StoppingTails {
  std::vector<StoppingTailRow> rows;
  LineFit fit_expansion;   // log tail vs sqrt(n), over positive rows
  LineFit fit_recurrence;
  int censored_expansion = 0;  // samples undecided at the horizon
  int censored_recurrence = 0;
  double c_target = 0.0, eps = 0.0, delta = 0.0;
};

/// Tail distributions of the two stopping times
///   E = min{ N : (1/n) sum_{j<n} log|2 x_j| >= c for all n >= N }
///   R = min{ N : sum_{j<n} -log dist_delta(x_j) <= eps n for all n >= N }
/// where dist_delta(x) = |x| when |x| < delta and 1 otherwise.
inline StoppingTails expansion_time_tails(const SkewSystem& sys, double c_target,
                                          double eps, double delta,
                                          const std::vector<int>& n_grid,
                                          int samples, std::uint64_t seed,
                                          unsigned workers = 1) {
  if (n_grid.empty()) throw ConfigError("expansion_time_tails: empty n grid");
  if (delta <= 0 || delta >= 1) throw ConfigError("expansion_time_tails: delta in (0,1)");
  int n_max = 0;
  for (int n : n_grid) n_max = std::max(n_max, n);
  std::vector<std::int64_t> E(std::size_t(samples), 0), R(std::size_t(samples), 0);
  for_each_sample(std::size_t(samples), workers, [&](std::size_t i) {
    rng::Stream s(seed, i);
    Point z = sys.random_point(s);
    double A = 0, B = 0;
    std::int64_t lastE = 0, lastR = 0;
    for (int n = 1; n <= n_max; ++n) {
      double ax = std::abs(z.x);
      A += std::log(std::max(2.0 * ax, 1e-300));
      if (ax < delta) B += -std::log(std::max(ax, 1e-300));
      z = sys.step(z);
      if (A / double(n) < c_target) lastE = n;
      if (B > eps * double(n)) lastR = n;
    }
    E[i] = lastE == n_max ? n_max + 1 : lastE + 1;
    R[i] = lastR == n_max ? n_max + 1 : lastR + 1;
  });

  StoppingTails out;
  out.c_target = c_target;
  out.eps = eps;
  out.delta = delta;
  for (std::int64_t e : E)
    if (e > n_max) ++out.censored_expansion;
  for (std::int64_t r : R)
    if (r > n_max) ++out.censored_recurrence;
  std::vector<double> xs_e, ys_e, xs_r, ys_r;
  for (int n : n_grid) {
    int ke = 0, kr = 0;
    for (std::size_t i = 0; i < E.size(); ++i) {
      if (E[i] > n) ++ke;
      if (R[i] > n) ++kr;
    }
    StoppingTailRow row;
    row.n = n;
    row.tail_expansion = double(ke) / double(samples);
    row.tail_recurrence = double(kr) / double(samples);
    row.band_expansion = wilson_interval(double(ke), double(samples));
    row.band_recurrence = wilson_interval(double(kr), double(samples));
    out.rows.push_back(row);
    if (ke > 0) {
      xs_e.push_back(std::sqrt(double(n)));
      ys_e.push_back(std::log(row.tail_expansion));
    }
    if (kr > 0) {
      xs_r.push_back(std::sqrt(double(n)));
      ys_r.push_back(std::log(row.tail_recurrence));
    }
  }
  out.fit_expansion = fit_line(xs_e, ys_e);
  out.fit_recurrence = fit_line(xs_r, ys_r);
  return out;
}

}  // namespace viana
