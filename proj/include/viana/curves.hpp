#pragma once

#include <cmath>
#include <vector>

#include "viana/rng.hpp"
#include "viana/skew.hpp"
#include "viana/util.hpp"

namespace viana {

struct CurveJet {
  double y = 0.0;
  double dy = 0.0;
  double d2y = 0.0;
};

/// Graph theta -> y(theta) with |y'| <= alpha and |y''| <= alpha, the class
/// preserved by the skew product.  Curves are finite trigonometric sums
///   y = level + sum_j amp_j sin(2 pi freq_j theta + phase_j),
/// so jets are exact and the derivative budget is certified by
///   sum |amp (2 pi freq)| and sum |amp (2 pi freq)^2|.
class AdmissibleCurve {
 public:
  struct Harmonic {
    double amp = 0.0;
    int freq = 1;
    double phase = 0.0;
  };

  AdmissibleCurve(double level, std::vector<Harmonic> harmonics, double alpha)
      : level_(level), harmonics_(std::move(harmonics)), alpha_(alpha) {
    if (alpha < 0) throw ConfigError("AdmissibleCurve: negative alpha");
    double s1 = 0, s2 = 0;
    for (const auto& h : harmonics_) {
      if (h.freq < 1) throw ConfigError("AdmissibleCurve: frequency must be >= 1");
      double w = kTwoPi * h.freq;
      s1 += std::abs(h.amp) * w;
      s2 += std::abs(h.amp) * w * w;
    }
    sup_dy_ = s1;
    sup_d2y_ = s2;
    if (s1 > alpha * (1 + 1e-12) || s2 > alpha * (1 + 1e-12))
      throw ConfigError("AdmissibleCurve: derivative budget exceeds alpha");
  }

  static AdmissibleCurve constant(double level, double alpha) {
    return AdmissibleCurve(level, {}, alpha);
  }

  /// Random curve: 1..4 harmonics, frequencies 1..6, total second-derivative
  /// budget a uniform fraction of alpha, level placed so the graph stays
  /// inside `range`.
  static AdmissibleCurve random(rng::Stream& s, const Interval& range, double alpha) {
    int K = 1 + int(s.below(4));
    std::vector<Harmonic> hs;
    hs.resize(std::size_t(K));
    std::vector<double> raw;
    raw.resize(std::size_t(K));
    double denom = 0;
    for (int j = 0; j < K; ++j) {
      hs[std::size_t(j)].freq = 1 + int(s.below(6));
      hs[std::size_t(j)].phase = s.uniform(0.0, kTwoPi);
      raw[std::size_t(j)] = s.uniform(0.1, 1.0);
      double w = kTwoPi * hs[std::size_t(j)].freq;
      denom += raw[std::size_t(j)] * w * w;
    }
    double budget = alpha * s.uniform(0.2, 1.0);
    double osc = 0;
    for (int j = 0; j < K; ++j) {
      hs[std::size_t(j)].amp = budget * raw[std::size_t(j)] / denom;
      osc += hs[std::size_t(j)].amp;
    }
    double pad = osc + 0.05 * range.length();
    double level = s.uniform(range.lo + pad, range.hi - pad);
    return AdmissibleCurve(level, std::move(hs), alpha);
  }

  CurveJet at(double theta) const {
    CurveJet j;
    j.y = level_;
    for (const auto& h : harmonics_) {
      double w = kTwoPi * h.freq;
      double ph = w * theta + h.phase;
      j.y += h.amp * std::sin(ph);
      j.dy += h.amp * w * std::cos(ph);
      j.d2y -= h.amp * w * w * std::sin(ph);
    }
    return j;
  }

  double alpha() const { return alpha_; }
  double sup_dy() const { return sup_dy_; }
  double sup_d2y() const { return sup_d2y_; }
  double oscillation() const {
    double o = 0;
    for (const auto& h : harmonics_) o += std::abs(h.amp);
    return o;
  }
  double level() const { return level_; }

  bool inside(const Interval& range) const {
    return level_ - oscillation() >= range.lo && level_ + oscillation() <= range.hi;
  }

 private:
  double level_;
  std::vector<Harmonic> harmonics_;
  double alpha_;
  double sup_dy_ = 0.0;
  double sup_d2y_ = 0.0;
};

/// Jet of theta -> f(theta, Y(theta)): the pushed curve over the source
/// parametrization.
inline CurveJet source_push_jet(const SkewSystem& sys, double theta, const CurveJet& c) {
  FiberJet f = sys.fiber_jet(theta, c.y);
  CurveJet out;
  out.y = f.f;
  out.dy = f.ft + f.fx * c.dy;
  out.d2y = f.ftt + 2.0 * f.ftx * c.dy + f.fxx * c.dy * c.dy + f.fx * c.d2y;
  return out;
}

/// Jet of the pushed curve over the image parametrization u = g(theta):
///   Y1'(u)  = src' / g'
///   Y1''(u) = (src'' - Y1'(u) g'') / g'^2
inline CurveJet image_push_jet(const CurveJet& src, const Jet3& base_jet) {
  CurveJet out;
  out.y = src.y;
  out.dy = src.dy / base_jet.d1;
  out.d2y = (src.d2y - out.dy * base_jet.d2) / (base_jet.d1 * base_jet.d1);
  return out;
}

/// One-step push of a curve over a single branch, sampled on a theta grid
/// with grid_total nodes across (0,1].
struct PushedCurve {
  int branch = 0;
  std::vector<double> theta;     // source nodes inside the branch
  std::vector<double> u;         // image parameter g(theta)
  std::vector<CurveJet> source;  // jets of theta -> f(theta, Y(theta))
  std::vector<CurveJet> image;   // jets over u
  double max_dy = 0.0;           // max |Y1'| over image nodes
  double max_d2y = 0.0;          // max |Y1''| over image nodes
};

inline PushedCurve push_curve(const SkewSystem& sys, const AdmissibleCurve& curve,
                              int branch, int grid_total = 100000) {
  const BaseMap& g = sys.base();
  if (branch < 0 || branch >= g.branch_count())
    throw ConfigError("push_curve: bad branch");
  Interval w = g.partition().branch_interval(branch);
  int n = std::max(8, int(std::lround(double(grid_total) * w.length())));
  PushedCurve out;
  out.branch = branch;
  out.theta.reserve(std::size_t(n));
  for (int k = 1; k <= n; ++k) {
    double theta = w.lo + w.length() * double(k) / double(n);
    CurveJet c = curve.at(theta);
    CurveJet src = source_push_jet(sys, theta, c);
    Jet3 bj = g.branch_jet(branch, theta);
    CurveJet img = image_push_jet(src, bj);
    out.theta.push_back(theta);
    out.u.push_back(bj.g);
    out.source.push_back(src);
    out.image.push_back(img);
    out.max_dy = std::max(out.max_dy, std::abs(img.dy));
    out.max_d2y = std::max(out.max_d2y, std::abs(img.d2y));
  }
  return out;
}

/// Exact jet at image point u of the curve pushed j = |cyl| steps along the
/// branch cylinder cyl: u is pulled back through the inverse branches and
/// the jet recursion is applied forward.
inline CurveJet pushed_jet(const SkewSystem& sys, const AdmissibleCurve& curve,
                           const Itinerary& cyl, double u) {
  const BaseMap& g = sys.base();
  std::vector<double> thetas(cyl.size());
  double t = u;
  for (std::size_t k = cyl.size(); k-- > 0;) {
    t = g.inverse_branch(cyl[k], t);
    thetas[k] = t;
  }
  CurveJet c = curve.at(thetas[0]);
  for (std::size_t k = 0; k < cyl.size(); ++k) {
    CurveJet src = source_push_jet(sys, thetas[k], c);
    c = image_push_jet(src, g.branch_jet(cyl[k], thetas[k]));
  }
  return c;
}

/// Transversality margin of the one-step push: at every grid node at least
/// one of |src'| >= alpha/2, |src''| >= 4 alpha must hold.  Returns the
/// worst margin max(|src'| - alpha/2, |src''| - 4 alpha) over the grid.
struct TransversalityReport {
  double margin = 0.0;
  double worst_theta = 0.0;
  std::size_t violations = 0;
};

inline TransversalityReport transversality_check(const SkewSystem& sys,
                                                 const AdmissibleCurve& curve,
                                                 int grid = 100000) {
  TransversalityReport rep;
  rep.margin = 1e300;
  double alpha = sys.alpha();
  for (int k = 1; k <= grid; ++k) {
    double theta = double(k) / double(grid);
    CurveJet src = source_push_jet(sys, theta, curve.at(theta));
    double m = std::max(std::abs(src.dy) - 0.5 * alpha, std::abs(src.d2y) - 4.0 * alpha);
    if (m < rep.margin) {
      rep.margin = m;
      rep.worst_theta = theta;
    }
    if (m < 0) ++rep.violations;
  }
  return rep;
}

/// Lebesgue measure of {theta : x_j(theta) in I} where x_j is the fiber
/// coordinate of the j-step push of the curve graph.  The estimate uses
/// linear interpolation between grid nodes; x_j is continuous across branch
/// boundaries because the drive is periodic through the wrap-around.
struct StripMeasure {
  double estimate = 0.0;
  double bound = 0.0;           // 6|I|/alpha + 2 sqrt(|I|/alpha) for j=1,
                                // else C sqrt(|I|/alpha), C = 6 exp(dK/(d-1))
  double grid_band = 0.0;       // resolution error estimate
  int crossings = 0;
  bool bound_applicable = true; // requires |I| <= alpha
  bool resolution_warning = false;
};

inline StripMeasure strip_measure(const SkewSystem& sys, const AdmissibleCurve& curve,
                                  int j, const Interval& I, int grid = 262144) {
  if (j < 1) throw ConfigError("strip_measure: need j >= 1");
  const BaseMap& g = sys.base();
  if (j > 1 && g.partition().residual_mass() > 0)
    throw ConfigError("strip_measure: truncated base cannot be iterated past the residual");
  double alpha = sys.alpha();
  if (alpha <= 0) throw ConfigError("strip_measure: need alpha > 0");

  StripMeasure out;
  out.bound_applicable = I.length() <= alpha * (1 + 1e-12);
  double ratio = I.length() / alpha;
  if (j == 1) {
    out.bound = 6.0 * ratio + 2.0 * std::sqrt(ratio);
  } else {
    double K = g.renyi_constant_analytic();
    double C = 6.0 * BaseMap::distortion_band(g.expansion_floor(), K);
    out.bound = C * std::sqrt(ratio);
  }

  auto x_j = [&](double theta) {
    double x = curve.at(theta).y;
    double t = theta;
    for (int step = 0; step < j; ++step) {
      double xn = sys.fiber_value(t, x);
      t = g.eval(t);
      x = xn;
    }
    return x;
  };

  double prev = x_j(1.0 / double(grid));
  double dx = 1.0 / double(grid);
  double acc = 0;
  // Mass of the leading sliver (0, 1/grid] assigned by its right endpoint.
  if (I.contains(prev)) acc += dx;
  for (int k = 2; k <= grid; ++k) {
    double v = x_j(double(k) / double(grid));
    double lo = std::min(prev, v), hi = std::max(prev, v);
    double overlap = std::min(hi, I.hi) - std::max(lo, I.lo);
    if (overlap > 0) {
      acc += (hi > lo) ? dx * std::min(1.0, overlap / (hi - lo)) : dx;
      if (lo < I.lo || hi > I.hi) ++out.crossings;
    } else if (lo <= I.hi && hi >= I.lo) {
      ++out.crossings;
    }
    prev = v;
  }
  out.estimate = acc;
  out.grid_band = dx * double(out.crossings) + 2.0 * dx;
  out.resolution_warning = out.crossings > grid / 8;
  return out;
}

}  // namespace viana
