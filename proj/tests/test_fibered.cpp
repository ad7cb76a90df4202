#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "viana/fibered.hpp"

using namespace viana;

TEST_CASE("attracting cycles are found across the quadratic family") {
  AttractorInfo fixed = find_attractors(0.5);
  double ystar = (std::sqrt(3.0) - 1.0) / 2.0;
  REQUIRE(fixed.found);
  CHECK(fixed.attracting);
  CHECK(fixed.period == 1);
  REQUIRE(fixed.cycle.size() == 1);
  CHECK(fixed.cycle[0] == Catch::Approx(ystar).margin(1e-9));
  CHECK(fixed.multiplier == Catch::Approx(-2.0 * ystar).margin(1e-9));

  AttractorInfo p3 = find_attractors(1.7548);
  REQUIRE(p3.found);
  CHECK(p3.attracting);
  CHECK(p3.period == 3);
  CHECK(std::abs(p3.multiplier) < 1.0);

  AttractorInfo cheb = find_attractors(2.0);
  CHECK_FALSE(cheb.attracting);
}

TEST_CASE("trap certification contracts with margin") {
  AttractorInfo info = find_attractors(0.5);
  FiberedSystem plain{BaseMap::uniform_linear(16), 0.5, Coupling::none()};
  TrapRegion t0 = build_trap(plain, info);
  REQUIRE(t0.certified);
  CHECK(t0.lambda == Catch::Approx(0.732251).margin(1e-3));
  CHECK(t0.lambda < 1.0);
  CHECK(t0.margin > 0.0);
  CHECK(t0.contains(info.cycle[0]));

  FiberedSystem sine{BaseMap::uniform_linear(16), 0.5, Coupling::sine(0.01)};
  TrapRegion ts = build_trap(sine, info);
  REQUIRE(ts.certified);
  CHECK(ts.radius == Catch::Approx(0.046850).epsilon(1e-3));
  CHECK(ts.lambda == Catch::Approx(0.825750).epsilon(1e-3));
  CHECK(ts.radius > t0.radius);

  // certification tests the extremal constant couplings, so any coupling of
  // the same amplitude certifies the same trap
  FiberedSystem bump{BaseMap::uniform_linear(16), 0.5, Coupling::bump(0.01)};
  TrapRegion tb = build_trap(bump, info);
  REQUIRE(tb.certified);
  CHECK(tb.radius == ts.radius);
  CHECK(tb.lambda == ts.lambda);
}

TEST_CASE("coupling families evaluate as declared") {
  CHECK(Coupling::none().value(0.37) == 0.0);
  CHECK(Coupling::constant(0.02).value(0.9) == 0.02);
  CHECK(Coupling::sine(0.01).value(0.25) == Catch::Approx(0.01).epsilon(1e-12));
  Coupling b = Coupling::bump(0.01);
  CHECK(b.value(0.5) == Catch::Approx(0.01).epsilon(1e-12));
  CHECK(b.value(0.25) == 0.0);
  CHECK(b.value(0.75) == 0.0);
  CHECK(b.value(0.1) == 0.0);
  double t = (0.3 - 0.5) / 0.25;
  double expect = 0.01 * std::pow(1.0 - t * t, 4.0);
  CHECK(b.value(0.3) == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("orbits inside the trap never leave and pair up") {
  AttractorInfo info = find_attractors(0.5);
  FiberedSystem fs{BaseMap::uniform_linear(16), 0.5, Coupling::sine(0.01)};
  TrapRegion trap = build_trap(fs, info);
  REQUIRE(trap.certified);

  rng::Stream s(7, 31);
  for (int i = 0; i < 10; ++i) {
    double x = s.open_unit();
    double y = s.uniform(trap.pieces.front().lo, trap.pieces.front().hi);
    for (int j = 0; j < 2000; ++j) {
      double xn = fs.base.eval(x);
      y = fs.step_y(x, y);
      x = xn;
      REQUIRE(trap.contains(y));
    }
  }

  SrbSummary srb = srb_pushforward(fs, trap, 3000, 5, 7, 2);
  CHECK(srb.pairing_disagreement < 1e-5);
  CHECK(srb.exponent_max <= std::log(trap.lambda) + 0.05);
  CHECK(srb.marginal_l1_uniform < 0.1);
  double total = 0;
  for (double v : srb.marginal) total += v;
  CHECK(total == Catch::Approx(1.0).margin(1e-9));

  SrbSummary again = srb_pushforward(fs, trap, 3000, 5, 7, 5);
  CHECK(srb.exponent_mean == again.exponent_mean);
  CHECK(srb.pairing_disagreement == again.pairing_disagreement);

  CHECK_THROWS_AS(srb_pushforward(fs, TrapRegion{}, 100, 2, 7, 1), ConfigError);
}

TEST_CASE("the uncoupled fiber exponent equals the cycle rate") {
  AttractorInfo info = find_attractors(0.5);
  FiberedSystem fs{BaseMap::uniform_linear(16), 0.5, Coupling::none()};
  TrapRegion trap = build_trap(fs, info);
  FiberExponent fe = fiber_exponent(fs, trap, 0.5, trap.pieces.front().mid(), 2000);
  CHECK(fe.applicable);
  CHECK(fe.value == Catch::Approx(std::log(std::sqrt(3.0) - 1.0)).margin(1e-6));
}

TEST_CASE("coexistence window balances attraction and expansion") {
  CoexistenceConfig cfg;
  cfg.n = 2048;
  cfg.transient = 256;
  cfg.mc_n = 1000;
  cfg.mc_samples = 50;
  cfg.seed = 7;
  cfg.workers = 2;
  CoexistenceReport rep = coexistence_demo(cfg);
  CHECK(rep.central_attracting);
  CHECK(rep.period == 3);
  CHECK(std::abs(rep.multiplier) < 1.0);
  CHECK(rep.central_exponent <= -0.1);
  CHECK(rep.frac_positive >= 0.9);
  CHECK(rep.bump_c3 > 0.0);
  CHECK(rep.theta_star == Catch::Approx(8.0 / 15.0).epsilon(1e-12));
}
