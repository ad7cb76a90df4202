#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "viana/base_map.hpp"
#include "viana/parallel.hpp"
#include "viana/rng.hpp"
#include "viana/skew.hpp"
#include "viana/statistics.hpp"
#include "viana/util.hpp"

namespace viana {

/// Attracting behavior of the quadratic fiber map T(y) = c - y^2, located by
/// following the critical orbit and Newton-polishing the detected cycle.
struct AttractorInfo {
  bool found = false;        // critical orbit settled on a periodic cycle
  bool attracting = false;   // |multiplier| < 1
  bool escaped = false;      // critical orbit left every bounded region
  int period = 0;
  double multiplier = 0.0;   // product of T'(y) over the cycle
  std::vector<double> cycle; // orbit order
};

inline AttractorInfo find_attractors(double c, int max_period = 64,
                                     double detect_tol = 1e-7) {
  AttractorInfo out;
  auto T = [c](double y) { return c - y * y; };
  double y = 0.0;
  const int transient = 4096;
  for (int j = 0; j < transient; ++j) {
    y = T(y);
    if (std::abs(y) > 4.0) {
      out.escaped = true;
      return out;
    }
  }
  std::vector<double> tail(std::size_t(2 * max_period + 1));
  tail[0] = y;
  for (std::size_t j = 1; j < tail.size(); ++j) tail[j] = T(tail[j - 1]);

  for (int p = 1; p <= max_period; ++p) {
    if (std::abs(tail[std::size_t(p)] - tail[0]) > detect_tol) continue;
    // Newton polish of T^p(y) = y from the observed near-cycle.
    double root = tail[0];
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
      double v = root, deriv = 1.0;
      for (int j = 0; j < p; ++j) {
        deriv *= -2.0 * v;
        v = T(v);
      }
      double H = v - root;
      double dH = deriv - 1.0;
      if (std::abs(dH) < 1e-14) break;
      double next = root - H / dH;
      if (std::abs(next - root) < 1e-14) {
        root = next;
        converged = true;
        break;
      }
      root = next;
    }
    if (!converged) continue;
    std::vector<double> cyc(std::size_t(p), 0.0);
    double v = root, mult = 1.0;
    for (int j = 0; j < p; ++j) {
      cyc[std::size_t(j)] = v;
      mult *= -2.0 * v;
      v = T(v);
    }
    // Reduce to the minimal period.
    for (int q = 1; q < p; ++q) {
      if (p % q != 0) continue;
      if (std::abs(cyc[std::size_t(q)] - cyc[0]) < 1e-12) {
        cyc.resize(std::size_t(q));
        mult = 1.0;
        for (double z : cyc) mult *= -2.0 * z;
        p = q;
        break;
      }
    }
    bool attracting = std::abs(mult) < 1.0 - 1e-9;
    bool exact_landing = std::abs(tail[0] - root) < 1e-12;
    if (!attracting && !exact_landing) continue;  // repelling coincidence
    out.found = true;
    out.attracting = attracting;
    out.period = p;
    out.multiplier = mult;
    out.cycle = std::move(cyc);
    return out;
  }
  return out;
}

/// Coupling a(x) entering the fiber parameter, with |a| <= eps.
struct Coupling {
  enum class Kind { None, Constant, Sine, Bump };
  Kind kind = Kind::None;
  double eps = 0.0;
  int freq = 1;

  static Coupling none() { return {}; }
  static Coupling constant(double eps) { return {Kind::Constant, eps, 1}; }
  static Coupling sine(double eps, int freq = 1) { return {Kind::Sine, eps, freq}; }
  // C^3 bump (1 - t^2)^4 supported on the middle half of the circle.
  static Coupling bump(double eps) { return {Kind::Bump, eps, 1}; }

  double value(double x) const {
    switch (kind) {
      case Kind::None: return 0.0;
      case Kind::Constant: return eps;
      case Kind::Sine: return eps * std::sin(kTwoPi * freq * x);
      case Kind::Bump: {
        double t = (x - 0.5) / 0.25;
        if (t <= -1.0 || t >= 1.0) return 0.0;
        double u = 1.0 - t * t;
        double u2 = u * u;
        return eps * u2 * u2;
      }
    }
    return 0.0;
  }
};

/// Skew product (x, y) -> (S(x), c + a(x) - y^2) with expanding factor S and
/// contracting-on-a-trap quadratic fibers.
struct FiberedSystem {
  BaseMap base;
  double c = 0.5;
  Coupling coupling;

  double step_y(double x, double y) const {
    return c + coupling.value(x) - y * y;
  }
  Point step(const Point& z) const { return {base.eval(z.theta), step_y(z.theta, z.x)}; }
};

/// Union of intervals around the attracting cycle, certified invariant under
/// the worst case coupling by exact quadratic interval images:
///   image([l,h]) = [c - max(l^2,h^2) - eps, c - min_sq + eps]
/// piece by piece around the cycle.  The radius grows geometrically from
/// radius0 until certification (and the derivative bound) first succeed.
struct TrapRegion {
  bool certified = false;
  int period = 0;
  double radius = 0.0;
  double lambda = 0.0;   // per-step contraction bound on the trap
  double margin = 0.0;   // worst containment slack
  std::vector<Interval> pieces;

  bool contains(double y) const {
    for (const auto& p : pieces)
      if (p.contains(y)) return true;
    return false;
  }
};

inline TrapRegion build_trap(const FiberedSystem& fs, const AttractorInfo& info,
                             double radius0 = 1e-4, double growth = 1.15,
                             int max_steps = 200) {
  if (!info.found || !info.attracting)
    throw ConfigError("build_trap: no attracting cycle to trap");
  TrapRegion out;
  out.period = info.period;
  double eps = fs.coupling.eps;
  double rho = radius0;
  for (int step = 0; step < max_steps; ++step, rho *= growth) {
    std::vector<Interval> pieces(info.cycle.size());
    for (std::size_t j = 0; j < info.cycle.size(); ++j)
      pieces[j] = {info.cycle[j] - rho, info.cycle[j] + rho};
    double margin = 1e300;
    double logprod = 0.0;
    bool ok = true;
    for (std::size_t j = 0; j < pieces.size(); ++j) {
      const Interval& cur = pieces[j];
      const Interval& nxt = pieces[(j + 1) % pieces.size()];
      double sqmax = std::max(cur.lo * cur.lo, cur.hi * cur.hi);
      double sqmin = cur.contains(0.0) ? 0.0
                                       : std::min(cur.lo * cur.lo, cur.hi * cur.hi);
      Interval img{fs.c - sqmax - eps, fs.c - sqmin + eps};
      margin = std::min({margin, img.lo - nxt.lo, nxt.hi - img.hi});
      if (margin < 0) {
        ok = false;
        break;
      }
      logprod += std::log(2.0 * std::max(std::abs(cur.lo), std::abs(cur.hi)));
    }
    if (!ok) continue;
    if (logprod >= 0) continue;  // no contraction certificate at this radius
    out.certified = true;
    out.radius = rho;
    out.lambda = std::exp(logprod / double(pieces.size()));
    out.margin = margin;
    out.pieces = std::move(pieces);
    return out;
  }
  return out;
}

/// Time averages of the pushforward (1/n) sum_j psi^j(mu_Leb x delta_y0):
/// observables y, y^2, xy plus the x-marginal occupation.  The pairing field
/// reruns the same base orbits from y0 +- pair_offset and reports the worst
/// disagreement among the three averages.
struct SrbSummary {
  int samples = 0, n = 0;
  double y0 = 0.0, pair_offset = 0.0;
  double avg_y = 0.0, avg_y2 = 0.0, avg_xy = 0.0;
  double exponent_mean = 0.0;  // (1/n) sum log |2 y_j|, averaged over samples
  double exponent_max = -1e300;
  double pairing_disagreement = 0.0;
  double marginal_l1_uniform = 0.0;
  int marginal_bins = 0;
  std::vector<double> marginal;  // base-marginal bin fractions
};

inline SrbSummary srb_pushforward(const FiberedSystem& fs, const TrapRegion& trap,
                                  int n, int samples, std::uint64_t seed,
                                  unsigned workers = 1,
                                  std::optional<double> y_start = std::nullopt,
                                  std::optional<double> pair_offset = std::nullopt,
                                  int marginal_bins = 64) {
  if (!trap.certified) throw ConfigError("srb_pushforward: trap not certified");
  SrbSummary out;
  out.samples = samples;
  out.n = n;
  out.y0 = y_start.value_or(trap.pieces.front().mid());
  out.pair_offset = pair_offset.value_or(std::min(trap.radius / 2.0, 0.005));
  out.marginal_bins = marginal_bins;
  if (!trap.contains(out.y0 - out.pair_offset) || !trap.contains(out.y0 + out.pair_offset))
    throw ConfigError("srb_pushforward: pairing starts leave the trap");

  struct Slot {
    double y = 0, y2 = 0, xy = 0, expo = 0;
    double dy = 0, dy2 = 0, dxy = 0;  // plus-start minus minus-start averages
    std::vector<std::uint32_t> hist;
  };
  std::vector<Slot> slots;
  slots.resize(std::size_t(samples));
  double span = fs.base.partition().retained_mass();
  for_each_sample(std::size_t(samples), workers, [&](std::size_t i) {
    rng::Stream s(seed, i);
    Slot& slot = slots[i];
    slot.hist.assign(std::size_t(marginal_bins), 0);
    double x = s.open_unit() * span;
    double y = out.y0;
    double yp = out.y0 + out.pair_offset;
    double ym = out.y0 - out.pair_offset;
    double sy = 0, sy2 = 0, sxy = 0, sexp = 0;
    double syp = 0, sym = 0, syp2 = 0, sym2 = 0, sxyp = 0, sxym = 0;
    for (int j = 0; j < n; ++j) {
      sy += y;
      sy2 += y * y;
      sxy += x * y;
      sexp += std::log(std::max(2.0 * std::abs(y), 1e-300));
      syp += yp;
      sym += ym;
      syp2 += yp * yp;
      sym2 += ym * ym;
      sxyp += x * yp;
      sxym += x * ym;
      int bx = std::min(marginal_bins - 1, int(x / span * double(marginal_bins)));
      ++slot.hist[std::size_t(bx)];
      double xn = fs.base.eval(x);
      y = fs.step_y(x, y);
      yp = fs.step_y(x, yp);
      ym = fs.step_y(x, ym);
      x = xn;
    }
    slot.y = sy / double(n);
    slot.y2 = sy2 / double(n);
    slot.xy = sxy / double(n);
    slot.expo = sexp / double(n);
    slot.dy = (syp - sym) / double(n);
    slot.dy2 = (syp2 - sym2) / double(n);
    slot.dxy = (sxyp - sxym) / double(n);
  });

  std::vector<std::uint64_t> hist(std::size_t(marginal_bins), 0);
  double dy = 0, dy2 = 0, dxy = 0;
  for (const auto& slot : slots) {
    out.avg_y += slot.y;
    out.avg_y2 += slot.y2;
    out.avg_xy += slot.xy;
    out.exponent_mean += slot.expo;
    out.exponent_max = std::max(out.exponent_max, slot.expo);
    dy += slot.dy;
    dy2 += slot.dy2;
    dxy += slot.dxy;
    for (int b = 0; b < marginal_bins; ++b) hist[std::size_t(b)] += slot.hist[std::size_t(b)];
  }
  double inv = 1.0 / double(samples);
  out.avg_y *= inv;
  out.avg_y2 *= inv;
  out.avg_xy *= inv;
  out.exponent_mean *= inv;
  out.pairing_disagreement =
      std::max({std::abs(dy), std::abs(dy2), std::abs(dxy)}) * inv;
  std::uint64_t total = std::uint64_t(samples) * std::uint64_t(n);
  out.marginal.resize(std::size_t(marginal_bins));
  for (int b = 0; b < marginal_bins; ++b) {
    out.marginal[std::size_t(b)] = double(hist[std::size_t(b)]) / double(total);
    out.marginal_l1_uniform +=
        std::abs(out.marginal[std::size_t(b)] - 1.0 / double(marginal_bins));
  }
  return out;
}

/// Fiber Lyapunov exponent along one orbit; starts outside the trap are
/// first iterated until capture (not applicable if never captured).
struct FiberExponent {
  double value = 0.0;
  bool applicable = false;
  int entry_time = 0;
};

inline FiberExponent fiber_exponent(const FiberedSystem& fs, const TrapRegion& trap,
                                    double x0, double y0, int n,
                                    int entry_cap = 10000) {
  FiberExponent out;
  double x = x0, y = y0;
  int t = 0;
  while (!trap.contains(y)) {
    if (t >= entry_cap || std::abs(y) > 4.0) return out;
    double xn = fs.base.eval(x);
    y = fs.step_y(x, y);
    x = xn;
    ++t;
  }
  out.entry_time = t;
  double sum = 0;
  for (int j = 0; j < n; ++j) {
    sum += std::log(std::max(2.0 * std::abs(y), 1e-300));
    double xn = fs.base.eval(x);
    y = fs.step_y(x, y);
    x = xn;
  }
  out.value = sum / double(n);
  out.applicable = true;
  return out;
}

/// Coexistence construction: a bump centered on the fixed base angle
/// theta* = branch/(d-1) retunes the fiber parameter there to a value with
/// an attracting cycle, while generic fibers keep positive exponents.
struct CoexistenceReport {
  double theta_star = 0.0;
  double a_prime = 0.0;          // fiber parameter on the invariant fiber
  double bump_amplitude = 0.0;
  double bump_width = 0.0;
  double bump_c3 = 0.0;          // measured C3 size of the perturbation
  int period = 0;                // attracting cycle of the central fiber
  double multiplier = 0.0;
  double central_exponent = 0.0; // fiber exponent on the invariant fiber
  double frac_positive = 0.0;    // random fibers with positive exponent
  double mean_fiber_exponent = 0.0;
  bool central_attracting = false;
};

struct CoexistenceConfig {
  int d = 16;
  int branch = 8;
  double a0 = 0.0;      // <= 0 means: solve for the Misiurewicz parameter
  double alpha = 0.01;
  double target = 1.7548;
  double width = 0.015625;  // 1/64
  int n = 8192;
  int transient = 512;
  int mc_n = 10000;
  int mc_samples = 400;
  std::uint64_t seed = 7;
  unsigned workers = 1;
};

inline CoexistenceReport coexistence_demo(const CoexistenceConfig& cfg) {
  CoexistenceReport rep;
  double a0 = cfg.a0 > 0 ? cfg.a0 : find_misiurewicz();
  rep.theta_star = double(cfg.branch) / double(cfg.d - 1);
  double drive = std::sin(kTwoPi * rep.theta_star);
  rep.bump_amplitude = cfg.target - a0 - cfg.alpha * drive;
  rep.a_prime = cfg.target;
  BumpSpec bump{rep.theta_star, cfg.width, rep.bump_amplitude};
  rep.bump_width = cfg.width;
  rep.bump_c3 = bump_c3_norm(bump);
  VianaParams p{BaseMap::uniform_linear(cfg.d), a0, cfg.alpha, bump};
  SkewSystem sys = SkewSystem::make(std::move(p));

  AttractorInfo info = find_attractors(cfg.target);
  rep.period = info.period;
  rep.multiplier = info.multiplier;
  rep.central_attracting = info.found && info.attracting;

  // Central exponent with theta pinned at theta*.  The fiber is invariant
  // because g(theta*) = theta* exactly; iterating the base in floating point
  // would compound the representation error of theta* at rate d per step and
  // eject the orbit, so the fiber map is iterated directly.
  double x = 0.2;
  for (int j = 0; j < cfg.transient; ++j) x = cfg.target - x * x;
  double sum = 0;
  for (int j = 0; j < cfg.n; ++j) {
    sum += std::log(std::max(2.0 * std::abs(x), 1e-300));
    x = cfg.target - x * x;
  }
  rep.central_exponent = sum / double(cfg.n);

  ExponentSummary mc = lyapunov_mc(sys, cfg.mc_n, cfg.mc_samples, cfg.seed, cfg.workers);
  rep.frac_positive = mc.frac_positive_fiber;
  rep.mean_fiber_exponent = mc.mean_fiber;
  return rep;
}

}  // namespace viana
