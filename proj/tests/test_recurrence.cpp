#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "viana/recurrence.hpp"

using namespace viana;

namespace {
SkewSystem reference_system(double alpha) {
  return SkewSystem::make(
      {BaseMap::uniform_linear(16), find_misiurewicz(), alpha, std::nullopt});
}
}  // namespace

TEST_CASE("critical windows shrink geometrically") {
  double alpha = 1e-5, s = std::sqrt(alpha);
  Interval j0 = critical_window(alpha, 0);
  CHECK(j0.hi == Catch::Approx(s).epsilon(1e-14));
  CHECK(j0.lo == Catch::Approx(-s).epsilon(1e-14));
  Interval j3 = critical_window(alpha, 3);
  CHECK(j3.hi == Catch::Approx(s * std::exp(-3.0)).epsilon(1e-14));
  CHECK(j0.contains(j3));
  CHECK_THROWS_AS(critical_window(0.0, 1), ConfigError);

  CHECK(m_of_alpha(1e-2) == 1);
  CHECK(m_of_alpha(1e-3) == 1);
  CHECK(m_of_alpha(1e-5) == 3);

  CHECK(depth_of(0.99 * s * std::exp(-2.0), alpha, 3) == 2);
  CHECK(depth_of(1.1 * s, alpha, 3) == -1);
  CHECK(depth_of(s * std::exp(-9.0), alpha, 3) == 3);
}

TEST_CASE("deep return tail matches the arcsine oracle") {
  // With the constant curve Y = sqrt(a0), the first fiber image is exactly
  // a0 + alpha sin(2 pi theta) - a0, so the measure of each return window
  // has the closed form 2/pi asin(min(1, e^{-(r-2)} / sqrt(alpha))).
  SkewSystem sys = reference_system(1e-2);
  AdmissibleCurve crit = AdmissibleCurve::constant(std::sqrt(sys.a0()), sys.alpha());
  auto rows = deep_return_tail(sys, crit, 2, 8, 100000);
  REQUIRE(rows.size() == 7);
  for (const auto& r : rows) {
    double arg = std::exp(-double(r.r - 2)) / std::sqrt(sys.alpha());
    double oracle = arg >= 1.0 ? 1.0 : 2.0 / kPi * std::asin(arg);
    CHECK(r.measure == Catch::Approx(oracle).margin(1e-3));
    CHECK_FALSE(r.censored);
    CHECK_FALSE(r.below_range);
    CHECK(r.band.lo <= r.measure);
    CHECK(r.band.hi >= r.measure);
    CHECK(r.measure <= std::min(1.0, r.bound));
  }
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CHECK(rows[k].measure <= rows[k - 1].measure);
    CHECK(rows[k].bound < rows[k - 1].bound);
  }
}

TEST_CASE("recurrence experiments reject alpha = 0") {
  SkewSystem sys = SkewSystem::make(
      {BaseMap::uniform_linear(16), 2.0, 0.0, std::nullopt});
  AdmissibleCurve c0 = AdmissibleCurve::constant(0.0, 0.0);
  CHECK_THROWS_AS(deep_return_tail(sys, c0, 2, 8, 1000), ConfigError);
  CHECK_THROWS_AS(m_of_alpha(0.0), ConfigError);
}

TEST_CASE("displacement partitions split branch images with mass control") {
  SkewSystem sys = reference_system(1e-3);
  AdmissibleCurve c0 = AdmissibleCurve::constant(0.0, sys.alpha());
  Displacement d = displacement_partitions(sys, c0);
  CHECK(d.ok);
  CHECK(d.mass_low == Catch::Approx(0.5).margin(1e-12));
  CHECK(d.mass_high == Catch::Approx(0.375).margin(1e-12));
  CHECK(d.separation == Catch::Approx(3.82683432e-4).epsilon(1e-6));
  CHECK(d.separation >= sys.alpha() / 100.0);

  rng::Stream s(7, 21);
  for (int i = 0; i < 20; ++i) {
    AdmissibleCurve c = AdmissibleCurve::random(s, sys.trap(), sys.alpha());
    Displacement dd = displacement_partitions(sys, c);
    CHECK(dd.ok);
    CHECK(dd.separation >= sys.alpha() / 100.0);
    CHECK(dd.mass_low >= 1.0 / 16);
    CHECK(dd.mass_high >= 1.0 / 16);
  }
}

TEST_CASE("hyperbolicity onset resolves every sample") {
  SkewSystem sys = reference_system(1e-2);
  OnsetResult o = n_of_alpha(sys, 50, 7);
  CHECK(o.n_hat == 3);
  CHECK(o.resolved == 50);
  CHECK_FALSE(o.censored);
  CHECK(o.eta_fit >= 1e-6);
  CHECK(o.eta_fit <= 1.0 / 3.0);

  OnsetLadder ladder = n_of_alpha_ladder(sys.params(), {1e-2, 3e-3}, 30, 7);
  REQUIRE(ladder.rows.size() == 2);
  CHECK(ladder.k0 <= ladder.k1);
  CHECK(ladder.k0 > 0.0);
}

TEST_CASE("stopping-time tails carry valid Wilson bands") {
  SkewSystem sys = reference_system(1e-2);
  StoppingTails st = expansion_time_tails(sys, 0.46, 0.143, 0.1, {50, 200, 800},
                                          100, 7, 2);
  REQUIRE(st.rows.size() == 3);
  for (const auto& r : st.rows) {
    CHECK(r.tail_expansion >= 0.0);
    CHECK(r.tail_expansion <= 1.0);
    CHECK(r.band_expansion.lo <= r.tail_expansion);
    CHECK(r.band_expansion.hi >= r.tail_expansion);
    CHECK(r.band_recurrence.lo <= r.tail_recurrence);
    CHECK(r.band_recurrence.hi >= r.tail_recurrence);
  }
  for (std::size_t k = 1; k < st.rows.size(); ++k) {
    CHECK(st.rows[k].tail_expansion <= st.rows[k - 1].tail_expansion);
    CHECK(st.rows[k].tail_recurrence <= st.rows[k - 1].tail_recurrence);
  }
  CHECK(st.censored_expansion >= 0);
  CHECK(st.censored_recurrence >= 0);

  StoppingTails again = expansion_time_tails(sys, 0.46, 0.143, 0.1, {50, 200, 800},
                                             100, 7, 5);
  for (std::size_t k = 0; k < st.rows.size(); ++k) {
    CHECK(st.rows[k].tail_expansion == again.rows[k].tail_expansion);
    CHECK(st.rows[k].tail_recurrence == again.rows[k].tail_recurrence);
  }
}
