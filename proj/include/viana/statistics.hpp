#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "viana/parallel.hpp"
#include "viana/rng.hpp"
#include "viana/skew.hpp"
#include "viana/util.hpp"

namespace viana {

using Observable = std::function<double(const Point&)>;

inline Observable observable_x() {
  return [](const Point& z) { return z.x; };
}
inline Observable observable_theta() {
  return [](const Point& z) { return z.theta; };
}
inline Observable observable_x2() {
  return [](const Point& z) { return z.x * z.x; };
}
/// Lipschitz bump in the fiber coordinate.
inline Observable observable_bump(double center, double width) {
  return [center, width](const Point& z) {
    double t = std::abs(z.x - center) / width;
    return t >= 1.0 ? 0.0 : 1.0 - t;
  };
}

/// Empirical mean and standard deviation of h along one long orbit.
struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
};

inline Moments observable_moments(const SkewSystem& sys, const Observable& h,
                                  int n, int burn_in, std::uint64_t seed,
                                  std::uint64_t stream_id = 0) {
  rng::Stream s(seed, stream_id);
  Point z = sys.random_point(s);
  for (int j = 0; j < burn_in; ++j) z = sys.step(z);
  double sum = 0, sum2 = 0;
  for (int j = 0; j < n; ++j) {
    double v = h(z);
    sum += v;
    sum2 += v * v;
    z = sys.step(z);
  }
  double m = sum / double(n);
  double var = std::max(0.0, sum2 / double(n) - m * m);
  return {m, std::sqrt(var)};
}

struct ExponentSummary {
  int samples = 0;
  int n = 0;
  std::vector<double> fiber;    // per-sample (1/n) sum log |2 x_j|
  std::vector<double> base;     // per-sample (1/n) sum log |g'(theta_j)|
  std::vector<double> generic;  // per-sample tangent-vector growth rate
  int degenerate = 0;           // exact critical hits (resampled)
  double mean_fiber = 0.0, q05_fiber = 0.0, q50_fiber = 0.0, q95_fiber = 0.0;
  double frac_positive_fiber = 0.0;
  double mean_base = 0.0, max_base_dev = 0.0;  // deviation from log(floor)
  double mean_generic = 0.0;
};

/// Monte Carlo Lyapunov exponents over Lebesgue-random starts.  The fiber
/// and base exponents come from the diagonal of the (lower triangular)
/// derivative; the generic exponent transports the vector (1,1)/sqrt(2).
inline ExponentSummary lyapunov_mc(const SkewSystem& sys, int n, int samples,
                                   std::uint64_t seed, unsigned workers = 1) {
  if (n < 1 || samples < 1) throw ConfigError("lyapunov_mc: bad sizes");
  ExponentSummary out;
  out.samples = samples;
  out.n = n;
  out.fiber.assign(std::size_t(samples), 0.0);
  out.base.assign(std::size_t(samples), 0.0);
  out.generic.assign(std::size_t(samples), 0.0);
  std::vector<int> degen(std::size_t(samples), 0);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for_each_sample(std::size_t(samples), workers, [&](std::size_t i) {
    rng::Stream s(seed, i);
    for (int attempt = 0; attempt < 4; ++attempt) {
      Point z = sys.random_point(s);
      TangentState t{z, inv_sqrt2, inv_sqrt2, 0.0, false};
      double fsum = 0, bsum = 0;
      bool bad = false;
      for (int j = 0; j < n; ++j) {
        if (t.z.x == 0.0) {
          bad = true;
          break;
        }
        Jet3 bj = sys.base().jet(t.z.theta);
        fsum += std::log(2.0 * std::abs(t.z.x));
        bsum += std::log(std::abs(bj.d1));
        t = push_tangent(sys, t);
      }
      if (!bad && !t.degenerate) {
        out.fiber[i] = fsum / double(n);
        out.base[i] = bsum / double(n);
        out.generic[i] = t.log_norm / double(n);
        break;
      }
      ++degen[i];
    }
  });
  for (int d : degen) out.degenerate += d;
  out.mean_fiber = mean_of(out.fiber);
  out.q05_fiber = quantile(out.fiber, 0.05);
  out.q50_fiber = quantile(out.fiber, 0.50);
  out.q95_fiber = quantile(out.fiber, 0.95);
  int pos = 0;
  for (double f : out.fiber) pos += f > 0 ? 1 : 0;
  out.frac_positive_fiber = double(pos) / double(samples);
  out.mean_base = mean_of(out.base);
  double logd = std::log(sys.base().expansion_floor());
  for (double b : out.base) out.max_base_dev = std::max(out.max_base_dev, std::abs(b - logd));
  out.mean_generic = mean_of(out.generic);
  return out;
}

/// Pooled occupation histogram over (theta, x) with integer counts, so the
/// result is independent of the worker layout.  next_counts receives the
/// one-step image of every deposited point: comparing the two checks
/// transfer-operator consistency of the empirical measure.
struct DensityGrid {
  int bins_theta = 0, bins_x = 0;
  Interval x_range;
  double theta_span = 1.0;
  std::vector<std::uint64_t> counts;
  std::vector<std::uint64_t> next_counts;
  std::uint64_t total = 0;

  std::vector<double> theta_marginal() const {
    std::vector<double> m(std::size_t(bins_theta), 0.0);
    for (int i = 0; i < bins_theta; ++i) {
      std::uint64_t s = 0;
      for (int j = 0; j < bins_x; ++j) s += counts[std::size_t(i) * std::size_t(bins_x) + std::size_t(j)];
      m[std::size_t(i)] = double(s) / double(total);
    }
    return m;
  }

  std::vector<double> x_marginal() const {
    std::vector<double> m(std::size_t(bins_x), 0.0);
    for (int i = 0; i < bins_theta; ++i)
      for (int j = 0; j < bins_x; ++j)
        m[std::size_t(j)] += double(counts[std::size_t(i) * std::size_t(bins_x) + std::size_t(j)]);
    for (double& v : m) v /= double(total);
    return m;
  }

  /// Total-variation distance between the empirical measure and its
  /// one-step pushforward; bounded by 2/n per orbit by construction.
  double transfer_tv() const {
    double tv = 0;
    for (std::size_t k = 0; k < counts.size(); ++k)
      tv += std::abs(double(counts[k]) - double(next_counts[k]));
    return 0.5 * tv / double(total);
  }
};

inline DensityGrid invariant_density(const SkewSystem& sys, int samples, int n,
                                     int burn_in, int bins_theta, int bins_x,
                                     std::uint64_t seed, unsigned workers = 1) {
  if (n < 1) throw ConfigError("invariant_density: need n >= 1");
  if (bins_theta < 1 || bins_x < 1) throw ConfigError("invariant_density: bad bins");
  DensityGrid grid;
  grid.bins_theta = bins_theta;
  grid.bins_x = bins_x;
  grid.x_range = sys.trap();
  grid.theta_span = sys.base().partition().retained_mass();
  std::size_t cells = std::size_t(bins_theta) * std::size_t(bins_x);
  std::vector<std::atomic<std::uint64_t>> acc(cells), acc_next(cells);
  for (auto& a : acc) a.store(0, std::memory_order_relaxed);
  for (auto& a : acc_next) a.store(0, std::memory_order_relaxed);

  auto cell_of = [&](const Point& z) {
    int bt = std::min(bins_theta - 1,
                      std::max(0, int(z.theta / grid.theta_span * double(bins_theta))));
    double xr = (z.x - grid.x_range.lo) / grid.x_range.length();
    int bx = std::min(bins_x - 1, std::max(0, int(xr * double(bins_x))));
    return std::size_t(bt) * std::size_t(bins_x) + std::size_t(bx);
  };

  for_each_sample(std::size_t(samples), workers, [&](std::size_t i) {
    rng::Stream s(seed, i);
    Point z = sys.random_point(s);
    for (int j = 0; j < burn_in; ++j) z = sys.step(z);
    for (int j = 0; j < n; ++j) {
      Point zn = sys.step(z);
      acc[cell_of(z)].fetch_add(1, std::memory_order_relaxed);
      acc_next[cell_of(zn)].fetch_add(1, std::memory_order_relaxed);
      z = zn;
    }
  });

  grid.counts.resize(cells);
  grid.next_counts.resize(cells);
  for (std::size_t k = 0; k < cells; ++k) {
    grid.counts[k] = acc[k].load(std::memory_order_relaxed);
    grid.next_counts[k] = acc_next[k].load(std::memory_order_relaxed);
  }
  grid.total = std::uint64_t(samples) * std::uint64_t(n);
  return grid;
}

/// Exact bin masses of the alpha = 0, a0 = 2 fiber marginal
/// rho(x) = 1/(pi sqrt(4 - x^2)) on [-2, 2].
inline std::vector<double> chebyshev_bin_masses(int bins, const Interval& range) {
  std::vector<double> m(std::size_t(bins), 0.0);
  auto cdf = [](double x) {
    double t = std::min(1.0, std::max(-1.0, x / 2.0));
    return 0.5 + std::asin(t) / kPi;
  };
  for (int j = 0; j < bins; ++j) {
    double a = range.lo + range.length() * double(j) / double(bins);
    double b = range.lo + range.length() * double(j + 1) / double(bins);
    m[std::size_t(j)] = cdf(b) - cdf(a);
  }
  return m;
}

inline double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ConfigError("l1_distance: size mismatch");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

struct CorrelationRow {
  int lag = 0;
  double cov = 0.0;
  double corr = 0.0;
};

struct CorrelationTable {
  std::vector<CorrelationRow> rows;
  double mean1 = 0.0, mean2 = 0.0, var1 = 0.0, var2 = 0.0;
  LineFit stretched_fit;  // log |corr| against sqrt(lag) over resolved lags
  double noise_floor = 0.0;
  bool decays = false;
};

/// Stationary cross-covariances cov(h1 o phi^lag, h2) pooled over samples.
inline CorrelationTable correlation_decay(const SkewSystem& sys, const Observable& h1,
                                          const Observable& h2, int max_lag,
                                          int samples, int n, int burn_in,
                                          std::uint64_t seed, unsigned workers = 1) {
  if (max_lag < 0 || n <= max_lag) throw ConfigError("correlation_decay: need n > max_lag");
  const std::size_t L = std::size_t(max_lag);
  struct Partial {
    std::vector<double> cross;
    double s1 = 0, s2 = 0, q1 = 0, q2 = 0;
    std::uint64_t count = 0;
  };
  std::vector<Partial> parts;
  parts.resize(std::size_t(samples));
  for_each_sample(std::size_t(samples), workers, [&](std::size_t i) {
    rng::Stream s(seed, i);
    Point z = sys.random_point(s);
    for (int j = 0; j < burn_in; ++j) z = sys.step(z);
    Partial& p = parts[i];
    p.cross.assign(L + 1, 0.0);
    std::vector<double> ring(L + 1, 0.0);
    for (int j = 0; j < n; ++j) {
      double v1 = h1(z), v2 = h2(z);
      ring[std::size_t(j) % (L + 1)] = v2;
      p.s1 += v1;
      p.s2 += v2;
      p.q1 += v1 * v1;
      p.q2 += v2 * v2;
      ++p.count;
      int lags = std::min(j, int(L));
      for (int l = 0; l <= lags; ++l)
        p.cross[std::size_t(l)] += v1 * ring[std::size_t(j - l) % (L + 1)];
      z = sys.step(z);
    }
  });

  // Serial fold in sample order keeps the result worker-count independent.
  std::vector<double> cross(L + 1, 0.0);
  std::vector<std::uint64_t> pairs(L + 1, 0);
  double s1 = 0, s2 = 0, q1 = 0, q2 = 0;
  std::uint64_t total = 0;
  for (const auto& p : parts) {
    for (std::size_t l = 0; l <= L; ++l) {
      cross[l] += p.cross[l];
      pairs[l] += p.count - l;
    }
    s1 += p.s1;
    s2 += p.s2;
    q1 += p.q1;
    q2 += p.q2;
    total += p.count;
  }
  CorrelationTable out;
  out.mean1 = s1 / double(total);
  out.mean2 = s2 / double(total);
  out.var1 = std::max(0.0, q1 / double(total) - out.mean1 * out.mean1);
  out.var2 = std::max(0.0, q2 / double(total) - out.mean2 * out.mean2);
  double scale = std::sqrt(out.var1 * out.var2);
  out.noise_floor = scale > 0 ? 4.0 / std::sqrt(double(total)) : 0.0;
  std::vector<double> xs, ys;
  for (std::size_t l = 0; l <= L; ++l) {
    CorrelationRow row;
    row.lag = int(l);
    row.cov = cross[l] / double(pairs[l]) - out.mean1 * out.mean2;
    row.corr = scale > 0 ? row.cov / scale : 0.0;
    out.rows.push_back(row);
    if (l >= 1 && std::abs(row.corr) > out.noise_floor) {
      xs.push_back(std::sqrt(double(l)));
      ys.push_back(std::log(std::abs(row.corr)));
    }
  }
  out.stretched_fit = fit_line(xs, ys);
  out.decays = out.stretched_fit.points >= 2 && out.stretched_fit.slope < 0;
  return out;
}

struct LdpRow {
  int n = 0;
  double tail = 0.0;
  WilsonBand band;
};

struct LdpResult {
  std::vector<LdpRow> rows;
  double mean_ref = 0.0;
  double delta = 0.0;
  bool strictly_decreasing = false;
};

/// Fraction of samples with |S_n/n - mean| > delta for each n in the grid.
/// The reference mean comes from a dedicated long pre-orbit unless supplied.
inline LdpResult large_deviations(const SkewSystem& sys, const Observable& h,
                                  double delta, const std::vector<int>& n_grid,
                                  int samples, int burn_in, std::uint64_t seed,
                                  unsigned workers = 1,
                                  double mean_override = std::nan("")) {
  if (n_grid.empty()) throw ConfigError("large_deviations: empty n grid");
  if (delta <= 0) throw ConfigError("large_deviations: need delta > 0");
  LdpResult out;
  out.delta = delta;
  out.mean_ref = std::isnan(mean_override)
                     ? observable_moments(sys, h, 1000000, burn_in, seed,
                                          std::uint64_t(samples) + 7).mean
                     : mean_override;
  int n_max = 0;
  for (int n : n_grid) n_max = std::max(n_max, n);
  std::vector<std::vector<char>> hits;
  hits.resize(std::size_t(samples));
  for_each_sample(std::size_t(samples), workers, [&](std::size_t i) {
    rng::Stream s(seed, i);
    Point z = sys.random_point(s);
    for (int j = 0; j < burn_in; ++j) z = sys.step(z);
    double S = 0;
    hits[i].assign(n_grid.size(), 0);
    int next = 0;
    std::vector<int> sorted = n_grid;
    std::sort(sorted.begin(), sorted.end());
    for (int n = 1; n <= n_max; ++n) {
      S += h(z);
      z = sys.step(z);
      while (next < int(sorted.size()) && sorted[std::size_t(next)] == n) {
        if (std::abs(S / double(n) - out.mean_ref) > delta) {
          // mark the row with this n in grid order
          for (std::size_t r = 0; r < n_grid.size(); ++r)
            if (n_grid[r] == n) hits[i][r] = 1;
        }
        ++next;
      }
    }
  });
  out.strictly_decreasing = true;
  double prev = 2.0;
  for (std::size_t r = 0; r < n_grid.size(); ++r) {
    int k = 0;
    for (std::size_t i = 0; i < hits.size(); ++i) k += hits[i][r];
    LdpRow row;
    row.n = n_grid[r];
    row.tail = double(k) / double(samples);
    row.band = wilson_interval(double(k), double(samples));
    out.rows.push_back(row);
    if (row.tail >= prev) out.strictly_decreasing = false;
    prev = row.tail;
  }
  return out;
}

struct CltResult {
  double ks = 1.0;
  double sigma_hat = 0.0;
  bool degenerate = false;
  int samples = 0;
  int n = 0;
};

/// Kolmogorov-Smirnov distance of studentized normalized Birkhoff sums
/// against the standard normal.
inline CltResult clt_check(const SkewSystem& sys, const Observable& h, int n,
                           int samples, int burn_in, std::uint64_t seed,
                           unsigned workers = 1) {
  CltResult out;
  out.samples = samples;
  out.n = n;
  std::vector<double> S(std::size_t(samples), 0.0);
  for_each_sample(std::size_t(samples), workers, [&](std::size_t i) {
    rng::Stream s(seed, i);
    Point z = sys.random_point(s);
    for (int j = 0; j < burn_in; ++j) z = sys.step(z);
    double sum = 0;
    for (int j = 0; j < n; ++j) {
      sum += h(z);
      z = sys.step(z);
    }
    S[i] = sum;
  });
  double m = mean_of(S) / double(n);
  std::vector<double> W(S.size());
  for (std::size_t i = 0; i < S.size(); ++i)
    W[i] = (S[i] - double(n) * m) / std::sqrt(double(n));
  double sd = stddev_of(W);
  out.sigma_hat = sd;
  if (sd < 1e-12) {
    out.degenerate = true;
    return out;
  }
  for (double& w : W) w /= sd;
  out.ks = ks_distance_normal(std::move(W));
  return out;
}

/// Same normalized-sum check for the base map alone with h(theta) = theta:
/// an expanding-map control with independent-increment behavior.
inline CltResult clt_check_base(const BaseMap& g, int n, int samples, int burn_in,
                                std::uint64_t seed, unsigned workers = 1) {
  CltResult out;
  out.samples = samples;
  out.n = n;
  std::vector<double> S(std::size_t(samples), 0.0);
  double span = g.partition().retained_mass();
  for_each_sample(std::size_t(samples), workers, [&](std::size_t i) {
    rng::Stream s(seed, i);
    double theta = s.open_unit() * span;
    for (int j = 0; j < burn_in; ++j) theta = g.eval(theta);
    double sum = 0;
    for (int j = 0; j < n; ++j) {
      sum += theta;
      theta = g.eval(theta);
    }
    S[i] = sum;
  });
  double m = mean_of(S) / double(n);
  std::vector<double> W(S.size());
  for (std::size_t i = 0; i < S.size(); ++i)
    W[i] = (S[i] - double(n) * m) / std::sqrt(double(n));
  double sd = stddev_of(W);
  out.sigma_hat = sd;
  if (sd < 1e-12) {
    out.degenerate = true;
    return out;
  }
  for (double& w : W) w /= sd;
  out.ks = ks_distance_normal(std::move(W));
  return out;
}

}  // namespace viana
