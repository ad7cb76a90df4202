#pragma once

#include <cmath>
#include <optional>

#include "viana/base_map.hpp"
#include "viana/rng.hpp"
#include "viana/util.hpp"

namespace viana {

struct Point {
  double theta = 0.0;
  double x = 0.0;
};

/// Compactly supported C3 bump amplitude * chi((theta-center)/width) with
/// chi(t) = (1-t^2)^4 on |t| < 1.  Used to open attracting windows inside
/// otherwise expanding fibers.
struct BumpSpec {
  double center = 0.5;
  double width = 0.03125;
  double amplitude = 0.0;
};

struct BumpJet {
  double b = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
};

inline BumpJet bump_jet(const BumpSpec& s, double theta) {
  double t = (theta - s.center) / s.width;
  if (std::abs(t) >= 1.0) return {};
  double u = 1.0 - t * t;
  double chi = u * u * u * u;
  double c1 = -8.0 * t * u * u * u;
  double c2 = 8.0 * u * u * (6.0 * t * t - u);
  double c3 = 48.0 * t * u * (3.0 * u - 4.0 * t * t);
  double w = s.width;
  return {s.amplitude * chi, s.amplitude * c1 / w, s.amplitude * c2 / (w * w),
          s.amplitude * c3 / (w * w * w)};
}

/// Measured C3 norm of the bump (reported so the smallness hypothesis on
/// fiber perturbations stays auditable); grows like |amplitude| / width^3.
inline double bump_c3_norm(const BumpSpec& s, int grid = 4096) {
  double n = 0;
  for (int k = -grid; k <= grid; ++k) {
    double theta = s.center + s.width * double(k) / double(grid);
    BumpJet j = bump_jet(s, theta);
    n = std::max({n, std::abs(j.b), std::abs(j.d1), std::abs(j.d2), std::abs(j.d3)});
  }
  return n;
}

/// Parameters of the skew product (theta, x) -> (g(theta), a(theta) - x^2)
/// with a(theta) = a0 + alpha sin(2 pi theta) + optional bump.
struct VianaParams {
  BaseMap base;
  double a0 = 2.0;
  double alpha = 0.0;
  std::optional<BumpSpec> bump;
};

/// Fiber map value and partial derivatives at (theta, x).
struct FiberJet {
  double f = 0.0;
  double ft = 0.0, fx = 0.0;
  double ftt = 0.0, ftx = 0.0, fxx = 0.0;
  double fttt = 0.0, fttx = 0.0, ftxx = 0.0;
};

/// Solves for the quadratic parameter a where the critical orbit of
/// h(x) = a - x^2 falls onto the period-two cycle after three steps:
/// h^3(0) = (1 - sqrt(4a-3))/2.  Bisection on [lo, hi]; rejects brackets
/// that do not straddle a root.
inline double find_misiurewicz(double lo = 1.80, double hi = 1.85,
                               double tol = 1e-13) {
  auto F = [](double a) {
    double h2 = a - a * a;
    double h3 = a - h2 * h2;
    return h3 - 0.5 * (1.0 - std::sqrt(4.0 * a - 3.0));
  };
  if (lo >= hi || 4.0 * lo - 3.0 <= 0.0)
    throw ConfigError("find_misiurewicz: bad bracket");
  double flo = F(lo), fhi = F(hi);
  if (flo == 0) return lo;
  if (fhi == 0) return hi;
  if ((flo > 0) == (fhi > 0))
    throw ConfigError("find_misiurewicz: bracket does not straddle a root");
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    double fm = F(mid);
    if (fm == 0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double a = 0.5 * (lo + hi);
  if (std::abs(4.0 * (1.0 - a)) <= 1.0)
    throw ContractError("find_misiurewicz: target cycle is not repelling");
  return a;
}

/// Invariant interval for the fiber dynamics, built from the one-step image:
/// with A(theta) = a(theta) ranging over [A_lo, A_hi],
///   hi = A_hi + slack,   lo = A_lo - max(lo^2, hi^2) - slack
/// iterated to a fixed point.  Symmetric-slack constructions fail here
/// because the lower image edge A_lo - hi^2 sits much further from a0 - a0^2
/// than the upper edge does from a0; the asymmetric form is exact for
/// alpha = 0 (e.g. a0 = 2 gives [-2, 2]).
inline Interval trapping_interval(const VianaParams& p) {
  if (p.alpha < 0) throw ConfigError("trapping_interval: negative alpha");
  double bump_hi = 0, bump_lo = 0;
  if (p.bump) {
    bump_hi = std::max(0.0, p.bump->amplitude);
    bump_lo = std::min(0.0, p.bump->amplitude);
  }
  double A_hi = p.a0 + p.alpha + bump_hi;
  double A_lo = p.a0 - p.alpha + bump_lo;
  double slack = p.alpha;
  double hi = A_hi + slack;
  if (hi <= 0) throw ConfigError("trapping_interval: a(theta) not positive");
  double lo = A_lo - hi * hi - slack;
  for (int it = 0; it < 64; ++it) {
    double next = A_lo - std::max(lo * lo, hi * hi) - slack;
    if (next >= lo - 1e-15) break;
    lo = next;
    if (lo < -(hi + 4.0))
      throw ConfigError("trapping_interval: no invariant interval (alpha or bump too large)");
  }
  return {lo, hi};
}

struct TrappingReport {
  bool pass = false;
  double slack = 0.0;       // worst-case margin before exiting the interval
  double worst_exit = 0.0;  // how far outside the image reaches when failing
  double worst_theta = 0.0;
};

class SkewSystem;
inline TrappingReport check_trapping(const VianaParams& p, const Interval& trap,
                                     int grid_theta = 10000, int grid_x = 1000);

/// Immutable skew product with a certified trapping interval.
class SkewSystem {
 public:
  static SkewSystem make(VianaParams p, int grid_theta = 10000, int grid_x = 1000) {
    Interval trap = trapping_interval(p);
    TrappingReport rep = check_trapping(p, trap, grid_theta, grid_x);
    if (!rep.pass)
      throw ConfigError("SkewSystem: trapping interval failed verification");
    return SkewSystem(std::move(p), trap);
  }

  const BaseMap& base() const { return params_.base; }
  double a0() const { return params_.a0; }
  double alpha() const { return params_.alpha; }
  const std::optional<BumpSpec>& bump() const { return params_.bump; }
  const VianaParams& params() const { return params_; }
  const Interval& trap() const { return trap_; }

  /// a(theta) and its first three derivatives.
  void drive_jet(double theta, double out[4]) const {
    double ph = kTwoPi * theta;
    double s = std::sin(ph), c = std::cos(ph);
    double w = kTwoPi * params_.alpha;
    out[0] = params_.a0 + params_.alpha * s;
    out[1] = w * c;
    out[2] = -w * kTwoPi * s;
    out[3] = -w * kTwoPi * kTwoPi * c;
    if (params_.bump) {
      BumpJet b = bump_jet(*params_.bump, theta);
      out[0] += b.b;
      out[1] += b.d1;
      out[2] += b.d2;
      out[3] += b.d3;
    }
  }

  double fiber_value(double theta, double x) const {
    double ph = kTwoPi * theta;
    double a = params_.a0 + params_.alpha * std::sin(ph);
    if (params_.bump) a += bump_jet(*params_.bump, theta).b;
    return a - x * x;
  }

  FiberJet fiber_jet(double theta, double x) const {
    double a[4];
    drive_jet(theta, a);
    FiberJet j;
    j.f = a[0] - x * x;
    j.ft = a[1];
    j.fx = -2.0 * x;
    j.ftt = a[2];
    j.ftx = 0.0;
    j.fxx = -2.0;
    j.fttt = a[3];
    j.fttx = 0.0;
    j.ftxx = 0.0;
    return j;
  }

  Point step(const Point& z) const {
    return {params_.base.eval(z.theta), fiber_value(z.theta, z.x)};
  }

  Point random_point(rng::Stream& s) const {
    double theta = s.open_unit() * params_.base.partition().retained_mass();
    double x = s.uniform(trap_.lo, trap_.hi);
    return {theta, x};
  }

 private:
  SkewSystem(VianaParams p, Interval trap) : params_(std::move(p)), trap_(trap) {}
  VianaParams params_;
  Interval trap_;
};

/// Verifies invariance of `trap` under the fiber maps.  The quadratic fiber
/// is extremal either at x = 0 or at the interval endpoints, so the check is
/// exact in x on a theta grid; a brute (theta, x) grid runs as a cross-check.
inline TrappingReport check_trapping(const VianaParams& p, const Interval& trap,
                                     int grid_theta, int grid_x) {
  TrappingReport rep;
  rep.slack = 1e300;
  double x2max = std::max(trap.lo * trap.lo, trap.hi * trap.hi);
  double x2min = trap.contains(0.0) ? 0.0 : std::min(trap.lo * trap.lo, trap.hi * trap.hi);
  auto probe = [&](double theta) {
    double ph = kTwoPi * theta;
    double a = p.a0 + p.alpha * std::sin(ph);
    if (p.bump) a += bump_jet(*p.bump, theta).b;
    double fmax = a - x2min;
    double fmin = a - x2max;
    double margin = std::min(trap.hi - fmax, fmin - trap.lo);
    if (margin < rep.slack) {
      rep.slack = margin;
      rep.worst_theta = theta;
    }
  };
  for (int k = 1; k <= grid_theta; ++k) probe(double(k) / double(grid_theta));
  probe(0.25);
  probe(0.75);
  if (p.bump) probe(p.bump->center);
  // Brute cross-check on a coarse (theta, x) grid.
  int gt = std::min(grid_theta, 512);
  for (int k = 1; k <= gt; ++k) {
    double theta = double(k) / double(gt);
    double ph = kTwoPi * theta;
    double a = p.a0 + p.alpha * std::sin(ph);
    if (p.bump) a += bump_jet(*p.bump, theta).b;
    for (int j = 0; j <= grid_x; j += std::max(1, grid_x / 64)) {
      double x = trap.lo + trap.length() * double(j) / double(grid_x);
      double margin = std::min(trap.hi - (a - x * x), (a - x * x) - trap.lo);
      rep.slack = std::min(rep.slack, margin);
    }
  }
  rep.pass = rep.slack >= -1e-12;
  rep.worst_exit = std::max(0.0, -rep.slack);
  return rep;
}

/// Tangent vector transported along the orbit with running log of the
/// accumulated norm growth.  The derivative is lower triangular:
///   w_theta = g'(theta) v_theta,  w_x = ft v_theta + fx v_x.
struct TangentState {
  Point z;
  double v_theta = 0.0;
  double v_x = 1.0;
  double log_norm = 0.0;
  bool degenerate = false;
};

inline TangentState push_tangent(const SkewSystem& sys, TangentState t) {
  Jet3 bj = sys.base().jet(t.z.theta);
  FiberJet fj = sys.fiber_jet(t.z.theta, t.z.x);
  double w_theta = bj.d1 * t.v_theta;
  double w_x = fj.ft * t.v_theta + fj.fx * t.v_x;
  double n = std::hypot(w_theta, w_x);
  if (n == 0.0) {
    t.degenerate = true;
    return t;
  }
  t.z = {sys.base().eval(t.z.theta), fj.f};
  t.v_theta = w_theta / n;
  t.v_x = w_x / n;
  t.log_norm += std::log(n);
  return t;
}

/// C3 distance between two skew products: base branches compared after
/// affine renormalization plus fiber partials up to total order three over
/// a (theta, x) grid on (0,1] x trap.
inline double c3_distance(const SkewSystem& reference, const SkewSystem& candidate,
                          int grid_theta = 2048, int grid_x = 64) {
  double dist = c3_distance(reference.base(), candidate.base(),
                            std::max(64, grid_theta / reference.base().branch_count()));
  const Interval& I = reference.trap();
  for (int k = 1; k <= grid_theta; ++k) {
    double theta = double(k) / double(grid_theta);
    for (int j = 0; j <= grid_x; ++j) {
      double x = I.lo + I.length() * double(j) / double(grid_x);
      FiberJet a = reference.fiber_jet(theta, x);
      FiberJet b = candidate.fiber_jet(theta, x);
      dist = std::max({dist, std::abs(a.f - b.f), std::abs(a.ft - b.ft),
                       std::abs(a.fx - b.fx), std::abs(a.ftt - b.ftt),
                       std::abs(a.ftx - b.ftx), std::abs(a.fxx - b.fxx),
                       std::abs(a.fttt - b.fttt), std::abs(a.fttx - b.fttx),
                       std::abs(a.ftxx - b.ftxx)});
    }
  }
  return dist;
}

}  // namespace viana
