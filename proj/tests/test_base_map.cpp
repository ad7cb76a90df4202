#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "viana/base_map.hpp"
#include "viana/rng.hpp"
#include "viana/util.hpp"

using namespace viana;

TEST_CASE("uniform partition indexes half-open branches") {
  MarkovPartition p = MarkovPartition::uniform(16);
  CHECK(p.branch_count() == 16);
  CHECK(p.branch_index(0.3) == 4);
  CHECK(p.branch_index(1.0) == 15);
  CHECK(p.branch_index(0.0625) == 0);
  CHECK(p.branch_index(1e-12) == 0);
  CHECK(p.retained_mass() == Catch::Approx(1.0).margin(1e-15));
  CHECK(p.residual_mass() == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("truncated partitions carry residual mass") {
  std::vector<double> b;
  for (int i = 0; i <= 8; ++i) b.push_back(double(i) / 16.0);
  MarkovPartition p = MarkovPartition::from_breakpoints(b);
  CHECK(p.branch_count() == 8);
  CHECK(p.retained_mass() == Catch::Approx(0.5).margin(1e-15));
  CHECK(p.residual_mass() == Catch::Approx(0.5).margin(1e-15));
  CHECK_THROWS_AS(MarkovPartition::from_breakpoints({0.0, 0.5, 0.25, 1.0}),
                  ConfigError);
}

TEST_CASE("linear jets are exact") {
  BaseMap g = BaseMap::uniform_linear(16);
  CHECK(g.branch_count() == 16);
  CHECK(g.expansion_floor() == Catch::Approx(16.0).margin(1e-15));
  Jet3 j = g.jet(0.3);
  CHECK(j.g == 16.0 * 0.3 - 4.0);
  CHECK(j.d1 == 16.0);
  CHECK(j.d2 == 0.0);
  CHECK(j.d3 == 0.0);
  auto od = g.iterate_derivative(0.3, 5);
  CHECK(od.log_deriv == Catch::Approx(5.0 * std::log(16.0)).margin(1e-12));
  CHECK(g.renyi_constant_analytic() == Catch::Approx(0.0).margin(1e-18));
}

TEST_CASE("inverse branches invert the branch maps") {
  BaseMap g = BaseMap::uniform_linear(16);
  for (int b = 0; b < 16; ++b) {
    double y = 0.37;
    double t = g.inverse_branch(b, y);
    CHECK(g.partition().branch_index(t) == b);
    CHECK(g.jet(t).g == Catch::Approx(y).margin(1e-14));
  }
  BaseMap q = BaseMap::quadratic_uniform(20, 0.1);
  for (int b = 0; b < 20; b += 7) {
    double t = q.inverse_branch(b, 0.81);
    CHECK(q.jet(t).g == Catch::Approx(0.81).margin(1e-12));
  }
}

TEST_CASE("orbit stepper refreshes shed mantissa bits") {
  BaseMap g = BaseMap::uniform_linear(16);
  // The pure analytic branch map sheds 4 mantissa bits per step under an
  // exact x16, so iterated orbits would collapse within ~13 steps.  eval()
  // must keep long orbits alive and statistically uniform.
  std::set<double> seen;
  double t = 0.37, prev = -1.0;
  for (int i = 0; i < 200; ++i) {
    double next = g.eval(t);
    CHECK(next > 0.0);
    CHECK(next <= 1.0);
    CHECK(std::abs(next - g.jet(t).g) <= 16.0 * 0x1p-53);
    CHECK(next != prev);
    prev = next;
    t = next;
    seen.insert(t);
  }
  CHECK(seen.size() == 200);

  double bins[16] = {0};
  t = 0.37;
  for (int i = 0; i < 100000; ++i) {
    t = g.eval(t);
    bins[std::min(15, int(t * 16.0))] += 1e-5;
  }
  double l1 = 0;
  for (double b : bins) l1 += std::abs(b - 1.0 / 16.0);
  CHECK(l1 < 0.03);
}

TEST_CASE("cylinders nest with exact Lebesgue mass and unit Gibbs ratios") {
  BaseMap g = BaseMap::uniform_linear(16);
  Interval c1 = g.cylinder({3});
  Interval c2 = g.cylinder({3, 7});
  Interval c3 = g.cylinder({3, 7, 11});
  CHECK(c1.contains(c2));
  CHECK(c2.contains(c3));
  CHECK(c1.length() == Catch::Approx(1.0 / 16).epsilon(1e-14));
  CHECK(c2.length() == Catch::Approx(1.0 / 256).epsilon(1e-14));
  CHECK(c3.length() == Catch::Approx(1.0 / 4096).epsilon(1e-14));
  CHECK(g.gibbs_ratio({3, 7, 11}) == Catch::Approx(1.0).epsilon(1e-13));
  double t1 = c3.lo + 0.25 * c3.length();
  double t2 = c3.lo + 0.75 * c3.length();
  CHECK(g.distortion_ratio(t1, t2, 3) == Catch::Approx(1.0).epsilon(1e-13));
  CHECK_THROWS_AS(g.cylinder({16}), ConfigError);
}

TEST_CASE("perturbed branches respect the floor and the Renyi budget") {
  BaseMap g = BaseMap::perturbed_linear(16, 1e-3);
  CHECK(g.expansion_floor() >= 16.0 - 1e-6);
  double K = g.renyi_constant_analytic();
  CHECK(K > 0.0);
  CHECK(K <= BaseMap::renyi_perturbation_bound(16.0, 0.0, 1e-3));
  CHECK(g.renyi_constant(512) <= K * (1 + 1e-9));
  CHECK(c3_distance(BaseMap::uniform_linear(16), g, 4096) ==
        Catch::Approx(1e-3).epsilon(1e-9));

  double band = BaseMap::distortion_band(g.expansion_floor(), K);
  rng::Stream s(7, 1);
  for (int n = 1; n <= 5; ++n) {
    for (int k = 0; k < 100; ++k) {
      auto it = Itinerary(std::size_t(n));
      for (int j = 0; j < n; ++j) it[std::size_t(j)] = int(s.below(16));
      double gr = g.gibbs_ratio(it);
      CHECK(gr <= band);
      CHECK(gr >= 1.0 / band);
      Interval c = g.cylinder(it);
      double d = g.distortion_ratio(c.lo + 0.25 * c.length(),
                                    c.lo + 0.75 * c.length(), n);
      CHECK(d <= band);
      CHECK(d >= 1.0 / band);
    }
  }
}

TEST_CASE("quadratic branches have the documented Renyi constant") {
  BaseMap g = BaseMap::quadratic_uniform(20, 0.1);
  CHECK(g.expansion_floor() == Catch::Approx(18.0).epsilon(1e-12));
  CHECK(g.renyi_constant_analytic() ==
        Catch::Approx(2.0 * 0.1 / (0.9 * 0.9)).epsilon(1e-12));
  double band = BaseMap::distortion_band(g.expansion_floor(),
                                         g.renyi_constant_analytic());
  rng::Stream s(7, 2);
  for (int k = 0; k < 200; ++k) {
    auto it = Itinerary(4);
    for (int j = 0; j < 4; ++j) it[std::size_t(j)] = int(s.below(20));
    double gr = g.gibbs_ratio(it);
    CHECK(gr <= band);
    CHECK(gr >= 1.0 / band);
  }
}

TEST_CASE("construction rejects maps below the expansion floor") {
  CHECK_THROWS_AS(BaseMap::uniform_linear(8), ConfigError);
  CHECK_THROWS_AS(BaseMap::quadratic_uniform(16, 0.5), ConfigError);
  CHECK_THROWS_AS(BaseMap::quadratic_uniform(20, 1.5), ConfigError);
}

TEST_CASE("distortion band formula") {
  CHECK(BaseMap::distortion_band(16.0, 0.0) == Catch::Approx(1.0).margin(1e-15));
  CHECK(BaseMap::distortion_band(16.0, 0.03) ==
        Catch::Approx(std::exp(16.0 * 0.03 / 15.0)).epsilon(1e-14));
}

TEST_CASE("utility helpers behave") {
  LineFit f = fit_line({1.0, 2.0, 3.0}, {5.0, 7.0, 9.0});
  CHECK(f.slope == Catch::Approx(2.0).margin(1e-12));
  CHECK(f.intercept == Catch::Approx(3.0).margin(1e-12));
  CHECK(f.points == 3);

  WilsonBand w = wilson_interval(50, 100);
  CHECK(w.lo < 0.5);
  CHECK(w.hi > 0.5);
  CHECK(wilson_interval(0, 100).lo == Catch::Approx(0.0).margin(1e-12));
  CHECK(wilson_interval(100, 100).hi == Catch::Approx(1.0).margin(1e-12));

  CHECK(normal_cdf(0.0) == Catch::Approx(0.5).margin(1e-12));
  CHECK(normal_cdf(1.959963985) == Catch::Approx(0.975).margin(1e-6));

  std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  CHECK(quantile(v, 0.5) == Catch::Approx(2.5).margin(0.51));
  CHECK(mean_of(v) == Catch::Approx(2.5).margin(1e-12));
}
