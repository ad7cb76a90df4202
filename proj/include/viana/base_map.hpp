#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <vector>

#include "viana/rng.hpp"
#include "viana/util.hpp"

namespace viana {

using Itinerary = std::vector<int>;

/// Finite list of retained full branches of a countable-branch Markov
/// partition of (0,1].  Branch i is the half-open interval
/// (breakpoints[i], breakpoints[i+1]]; mass beyond the last breakpoint is
/// the truncated residual and carries no branch.
struct MarkovPartition {
  std::vector<double> breakpoints;

  static MarkovPartition uniform(int d) {
    if (d < 2) throw ConfigError("MarkovPartition: need at least 2 branches");
    MarkovPartition p;
    p.breakpoints.resize(std::size_t(d) + 1);
    for (int i = 0; i <= d; ++i) p.breakpoints[std::size_t(i)] = double(i) / double(d);
    return p;
  }

  static MarkovPartition from_breakpoints(std::vector<double> b) {
    if (b.size() < 3) throw ConfigError("MarkovPartition: need at least 2 branches");
    if (b.front() != 0.0) throw ConfigError("MarkovPartition: first breakpoint must be 0");
    if (b.back() > 1.0) throw ConfigError("MarkovPartition: breakpoints exceed 1");
    for (std::size_t i = 1; i < b.size(); ++i)
      if (!(b[i] > b[i - 1])) throw ConfigError("MarkovPartition: breakpoints must increase");
    return {std::move(b)};
  }

  int branch_count() const { return int(breakpoints.size()) - 1; }
  double retained_mass() const { return breakpoints.back(); }
  double residual_mass() const { return 1.0 - breakpoints.back(); }

  /// Branch containing theta, or -1 when theta lies outside the retained
  /// region (theta <= 0 or theta > retained_mass()).
  int branch_index(double theta) const {
    if (theta <= 0.0 || theta > breakpoints.back()) return -1;
    auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), theta);
    return int(it - breakpoints.begin()) - 1;
  }

  Interval branch_interval(int i) const {
    if (i < 0 || i >= branch_count()) throw ConfigError("branch_interval: bad index");
    return {breakpoints[std::size_t(i)], breakpoints[std::size_t(i) + 1]};
  }
};

/// Value and first three derivatives of the base map at a point.
struct Jet3 {
  double g = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
};

/// Piecewise expanding Markov base map: every retained branch is a
/// monotone C3 diffeomorphism onto (0,1].  Three families are provided:
///   linear             g(theta) = (theta - b_i)/L_i
///   perturbed_linear   d-fold linear plus A sin(2 pi k u) in branch coords
///   quadratic_uniform  u + q u(1-u) in branch coordinates
class BaseMap {
 public:
  enum class Kind { Linear, PerturbedLinear, QuadraticUniform };

  static BaseMap uniform_linear(int d, double min_expansion = 16.0) {
    BaseMap m;
    m.kind_ = Kind::Linear;
    m.partition_ = MarkovPartition::uniform(d);
    m.d_ = d;
    m.validate(min_expansion);
    return m;
  }

  /// Full linear branches over an arbitrary (possibly truncated) partition.
  static BaseMap linear(MarkovPartition p, double min_expansion = 16.0) {
    BaseMap m;
    m.kind_ = Kind::Linear;
    m.partition_ = std::move(p);
    m.d_ = m.partition_.branch_count();
    m.validate(min_expansion);
    return m;
  }

  /// d-fold linear map perturbed inside each branch by A sin(2 pi k u),
  /// A chosen so the C3 norm of the perturbation equals c3_budget.  The
  /// perturbation vanishes at branch endpoints, so the partition and the
  /// full-branch Markov property are unchanged.
  static BaseMap perturbed_linear(int d, double c3_budget, int frequency = 1,
                                  double min_expansion = 16.0) {
    if (c3_budget < 0) throw ConfigError("perturbed_linear: negative budget");
    if (frequency < 1) throw ConfigError("perturbed_linear: frequency must be >= 1");
    BaseMap m;
    m.kind_ = Kind::PerturbedLinear;
    m.partition_ = MarkovPartition::uniform(d);
    m.d_ = d;
    m.freq_ = frequency;
    double w = kTwoPi * frequency * d;
    m.amp_ = c3_budget / (w * w * w);
    m.declared_eps_ = c3_budget;
    m.validate(min_expansion - c3_budget);
    return m;
  }

  /// Branch maps u + q u(1-u), q in (0,1); Renyi constant 2q/(1-q)^2.
  static BaseMap quadratic_uniform(int d, double q, double min_expansion = 16.0) {
    if (q <= 0.0 || q >= 1.0) throw ConfigError("quadratic_uniform: q must lie in (0,1)");
    BaseMap m;
    m.kind_ = Kind::QuadraticUniform;
    m.partition_ = MarkovPartition::uniform(d);
    m.d_ = d;
    m.q_ = q;
    m.validate(min_expansion);
    return m;
  }

  Kind kind() const { return kind_; }
  const MarkovPartition& partition() const { return partition_; }
  int branch_count() const { return partition_.branch_count(); }
  int branch_index(double theta) const { return partition_.branch_index(theta); }
  double declared_c3_eps() const { return declared_eps_; }

  /// Analytic infimum of |g'| over all retained branches.
  double expansion_floor() const {
    switch (kind_) {
      case Kind::Linear: {
        double lmax = 0;
        for (int i = 0; i < branch_count(); ++i)
          lmax = std::max(lmax, partition_.branch_interval(i).length());
        return 1.0 / lmax;
      }
      case Kind::PerturbedLinear:
        return double(d_) * (1.0 - kTwoPi * freq_ * amp_);
      case Kind::QuadraticUniform:
        return double(d_) * (1.0 - q_);
    }
    return 0;
  }

  /// Orbit step.  Exactly linear branches with power-of-two slope compute
  /// m*theta - b without rounding, so iterated orbits shed log2(m) mantissa
  /// bits every step and collapse onto a fixed point within ~a dozen
  /// iterations.  eval() therefore refills the vacated low-order window --
  /// one ulp of the pre-image amplified by the branch slope -- with a hash
  /// of the pre-image bit pattern.  The offset stays below |g'| 2^-53
  /// (~2e-15 for d = 16), and long floating-point orbits stay statistically
  /// faithful.  jet() remains the unmodified analytic branch map, so
  /// derivative products, cylinders and distortion ratios stay exact.
  double eval(double theta) const {
    Jet3 J = jet(theta);
    if (kind_ != Kind::Linear) return J.g;
    std::uint64_t bits;
    std::memcpy(&bits, &theta, sizeof bits);
    double xi = double(rng::mix64(bits) >> 11) * 0x1p-53;  // in [0, 1)
    double g = J.g - xi * J.d1 * 0x1p-53;
    return g > 0.0 ? g : J.g;
  }

  Jet3 jet(double theta) const {
    int i = branch_index(theta);
    if (i < 0) throw std::domain_error("BaseMap: point outside retained branches");
    return branch_jet(i, theta);
  }

  /// Jet of the branch-i map extended to any theta (used for rescaled
  /// branch comparisons; theta need not lie inside branch i).
  Jet3 branch_jet(int i, double theta) const {
    Interval w = partition_.branch_interval(i);
    double L = w.length();
    switch (kind_) {
      case Kind::Linear:
        return {(theta - w.lo) / L, 1.0 / L, 0.0, 0.0};
      case Kind::PerturbedLinear: {
        double u = double(d_) * theta - double(i);
        double ph = kTwoPi * freq_ * u;
        double c1 = kTwoPi * freq_ * double(d_);
        return {u + amp_ * std::sin(ph),
                double(d_) * (1.0 + kTwoPi * freq_ * amp_ * std::cos(ph)),
                -amp_ * c1 * c1 * std::sin(ph),
                -amp_ * c1 * c1 * c1 * std::cos(ph)};
      }
      case Kind::QuadraticUniform: {
        double u = double(d_) * theta - double(i);
        return {u + q_ * u * (1.0 - u),
                double(d_) * (1.0 + q_ - 2.0 * q_ * u),
                -2.0 * q_ * double(d_) * double(d_), 0.0};
      }
    }
    return {};
  }

  /// Inverse of the branch-i map at y in (0,1]; exact for linear branches,
  /// Newton-polished to ~1e-15 otherwise.
  double inverse_branch(int i, double y) const {
    Interval w = partition_.branch_interval(i);
    switch (kind_) {
      case Kind::Linear:
        return w.lo + y * w.length();
      case Kind::PerturbedLinear: {
        double u = y;
        for (int it = 0; it < 8; ++it) {
          double ph = kTwoPi * freq_ * u;
          double f = u + amp_ * std::sin(ph) - y;
          double df = 1.0 + kTwoPi * freq_ * amp_ * std::cos(ph);
          u -= f / df;
        }
        return (u + double(i)) / double(d_);
      }
      case Kind::QuadraticUniform: {
        double disc = (1.0 + q_) * (1.0 + q_) - 4.0 * q_ * y;
        double u = ((1.0 + q_) - std::sqrt(disc)) / (2.0 * q_);
        return (u + double(i)) / double(d_);
      }
    }
    return 0;
  }

  /// Exact interval of the cylinder with the given symbol sequence:
  /// theta such that g^j(theta) lies in branch it[j] for all j.
  Interval cylinder(const Itinerary& it) const {
    if (it.empty()) return {0.0, partition_.retained_mass()};
    for (int s : it)
      if (s < 0 || s >= branch_count()) throw ConfigError("cylinder: bad symbol");
    Interval cur = partition_.branch_interval(it.back());
    for (std::size_t k = it.size() - 1; k-- > 0;) {
      int s = it[std::size_t(k)];
      cur = {inverse_branch(s, cur.lo), inverse_branch(s, cur.hi)};
    }
    return cur;
  }

  /// n-step orbit derivative product |(g^n)'(theta)| and the endpoint.
  struct OrbitDerivative {
    double endpoint = 0.0;
    double log_deriv = 0.0;
  };

  OrbitDerivative iterate_derivative(double theta, int n) const {
    OrbitDerivative out;
    double t = theta;
    for (int j = 0; j < n; ++j) {
      Jet3 J = jet(t);
      out.log_deriv += std::log(std::abs(J.d1));
      t = J.g;
    }
    out.endpoint = t;
    return out;
  }

  /// Leb(cylinder) * |(g^n)'(midpoint)|: equals 1 exactly for linear
  /// branches and lies in the Gibbs band exp(+-dK/(d-1)) in general.
  double gibbs_ratio(const Itinerary& it) const {
    Interval c = cylinder(it);
    OrbitDerivative od = iterate_derivative(c.mid(), int(it.size()));
    return c.length() * std::exp(od.log_deriv);
  }

  /// Ratio |(g^n)'(t1)| / |(g^n)'(t2)| for two points (meaningful when both
  /// lie in one n-cylinder).
  double distortion_ratio(double t1, double t2, int n) const {
    OrbitDerivative a = iterate_derivative(t1, n);
    OrbitDerivative b = iterate_derivative(t2, n);
    return std::exp(a.log_deriv - b.log_deriv);
  }

  /// Two-sided distortion band exp(dK/(d-1)) for expansion floor d.
  static double distortion_band(double d_floor, double K) {
    return std::exp(d_floor * K / (d_floor - 1.0));
  }

  /// Renyi constant sup |g''| / |g'|^2, closed form per family.
  double renyi_constant_analytic() const {
    switch (kind_) {
      case Kind::Linear:
        return 0.0;
      case Kind::PerturbedLinear: {
        double w = kTwoPi * freq_;
        double num = amp_ * w * w * double(d_) * double(d_);
        double den = double(d_) * (1.0 - w * amp_);
        return num / (den * den);
      }
      case Kind::QuadraticUniform:
        return 2.0 * q_ / ((1.0 - q_) * (1.0 - q_));
    }
    return 0;
  }

  /// Grid-measured Renyi constant.
  double renyi_constant(int grid_per_branch = 512) const {
    double K = 0;
    for (int i = 0; i < branch_count(); ++i) {
      Interval w = partition_.branch_interval(i);
      for (int k = 1; k <= grid_per_branch; ++k) {
        double t = w.lo + w.length() * double(k) / double(grid_per_branch);
        Jet3 J = branch_jet(i, t);
        K = std::max(K, std::abs(J.d2) / (J.d1 * J.d1));
      }
    }
    return K;
  }

  /// Renyi bound for a map at C2 distance <= eps from a reference with
  /// expansion floor d and Renyi constant K_ref:
  ///   K_tilde <= eps/(d-eps)^2 + K_ref/(1-eps)^2.
  static double renyi_perturbation_bound(double d_floor, double K_ref, double eps) {
    return eps / ((d_floor - eps) * (d_floor - eps)) +
           K_ref / ((1.0 - eps) * (1.0 - eps));
  }

 private:
  void validate(double min_expansion) const {
    double floor = expansion_floor();
    if (floor <= 1.0) throw ConfigError("BaseMap: branch maps are not expanding");
    if (floor + 1e-12 < min_expansion)
      throw ConfigError("BaseMap: expansion floor below required minimum");
    // Grid check of monotonicity, the analytic floor, and full-branch images.
    for (int i = 0; i < branch_count(); ++i) {
      Interval w = partition_.branch_interval(i);
      const int G = 256;
      double prev = branch_jet(i, w.lo).g;
      if (std::abs(prev) > 1e-9) throw ConfigError("BaseMap: branch does not start at 0");
      for (int k = 1; k <= G; ++k) {
        double t = w.lo + w.length() * double(k) / double(G);
        Jet3 J = branch_jet(i, t);
        if (J.d1 + 1e-9 < floor) throw ConfigError("BaseMap: expansion floor violated on grid");
        if (J.g <= prev) throw ConfigError("BaseMap: branch not strictly increasing");
        prev = J.g;
      }
      if (std::abs(prev - 1.0) > 1e-9) throw ConfigError("BaseMap: branch does not end at 1");
    }
  }

  Kind kind_ = Kind::Linear;
  MarkovPartition partition_;
  int d_ = 0;
  int freq_ = 1;
  double amp_ = 0.0;
  double q_ = 0.0;
  double declared_eps_ = 0.0;
};

/// C3 distance between two base maps after affine renormalization of each
/// candidate branch onto the matching reference branch.  Derivative orders
/// 0..3 are compared on a per-branch grid.
inline double c3_distance(const BaseMap& reference, const BaseMap& candidate,
                          int grid_per_branch = 512) {
  if (reference.branch_count() != candidate.branch_count())
    throw ConfigError("c3_distance: branch counts differ");
  double dist = 0;
  for (int i = 0; i < reference.branch_count(); ++i) {
    Interval wr = reference.partition().branch_interval(i);
    Interval wc = candidate.partition().branch_interval(i);
    double scale = wc.length() / wr.length();
    for (int k = 0; k <= grid_per_branch; ++k) {
      double t = wr.lo + wr.length() * double(k) / double(grid_per_branch);
      double tc = wc.lo + scale * (t - wr.lo);
      Jet3 a = reference.branch_jet(i, t);
      Jet3 b = candidate.branch_jet(i, tc);
      dist = std::max(dist, std::abs(a.g - b.g));
      dist = std::max(dist, std::abs(a.d1 - b.d1 * scale));
      dist = std::max(dist, std::abs(a.d2 - b.d2 * scale * scale));
      dist = std::max(dist, std::abs(a.d3 - b.d3 * scale * scale * scale));
    }
  }
  return dist;
}

}  // namespace viana
