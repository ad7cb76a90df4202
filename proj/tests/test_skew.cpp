#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <optional>

#include "viana/skew.hpp"

using namespace viana;

namespace {
VianaParams reference_params(double alpha,
                             std::optional<BumpSpec> bump = std::nullopt) {
  return {BaseMap::uniform_linear(16), find_misiurewicz(), alpha, bump};
}
}  // namespace

TEST_CASE("the tuned quadratic parameter sends the critical orbit onto a 2-cycle") {
  double a = find_misiurewicz();
  CHECK(a == Catch::Approx(1.839286755214152).margin(1e-12));
  auto f = [a](double x) { return a - x * x; };
  double x3 = f(f(f(0.0)));       // lands on the cycle after three steps
  double x4 = f(x3);
  CHECK(f(f(x3)) == Catch::Approx(x3).margin(1e-9));
  CHECK(f(f(x4)) == Catch::Approx(x4).margin(1e-9));
  double multiplier = 4.0 * x3 * x4;  // derivative of f^2 along the cycle
  CHECK(multiplier == Catch::Approx(-3.357147020856609).margin(1e-6));
  CHECK(std::abs(multiplier) > 1.0);  // repelling, so no attracting cycle
}

TEST_CASE("trapping intervals are forward invariant") {
  VianaParams cheb{BaseMap::uniform_linear(16), 2.0, 0.0, std::nullopt};
  Interval t0 = trapping_interval(cheb);
  CHECK(t0.lo == Catch::Approx(-2.0).margin(1e-14));
  CHECK(t0.hi == Catch::Approx(2.0).margin(1e-14));

  VianaParams p = reference_params(0.01);
  Interval trap = trapping_interval(p);
  CHECK(trap.lo == Catch::Approx(-1.637660482900619).margin(1e-12));
  CHECK(trap.hi == Catch::Approx(1.859286755214152).margin(1e-12));

  TrappingReport rep = check_trapping(p, trap, 2000, 400);
  CHECK(rep.pass);
  CHECK(rep.slack > 0.0);

  SkewSystem sys = SkewSystem::make(reference_params(0.01));
  for (int i = 0; i <= 200; ++i) {
    double theta = (i + 0.5) / 201.0;
    for (int j = 0; j <= 50; ++j) {
      double x = trap.lo + trap.length() * double(j) / 50.0;
      CHECK(trap.contains(sys.fiber_value(theta, x)));
    }
  }
}

TEST_CASE("bump perturbations are compactly supported with exact jets") {
  BumpSpec b{0.3, 0.1, 1e-3};
  BumpJet center = bump_jet(b, 0.3);
  CHECK(center.b == Catch::Approx(1e-3).epsilon(1e-12));
  CHECK(center.d1 == Catch::Approx(0.0).margin(1e-15));
  CHECK(bump_jet(b, 0.3 + 0.1).b == Catch::Approx(0.0).margin(1e-15));
  CHECK(bump_jet(b, 0.3 - 0.11).b == Catch::Approx(0.0).margin(1e-15));
  double h = 1e-6;
  double fd = (bump_jet(b, 0.27 + h).b - bump_jet(b, 0.27 - h).b) / (2 * h);
  CHECK(bump_jet(b, 0.27).d1 == Catch::Approx(fd).margin(1e-5));
  CHECK(bump_c3_norm(b) >= 1e-3);
}

TEST_CASE("fiber jets match finite differences") {
  SkewSystem sys = SkewSystem::make(reference_params(0.01, BumpSpec{0.3, 0.1, 1e-3}));
  double th = 0.342, x = 0.7, h = 1e-6;
  FiberJet f = sys.fiber_jet(th, x);
  double fd_t = (sys.fiber_value(th + h, x) - sys.fiber_value(th - h, x)) / (2 * h);
  double fd_x = (sys.fiber_value(th, x + h) - sys.fiber_value(th, x - h)) / (2 * h);
  CHECK(f.ft == Catch::Approx(fd_t).margin(1e-6));
  CHECK(f.fx == Catch::Approx(fd_x).margin(1e-6));
  CHECK(f.fx == Catch::Approx(-2.0 * x).margin(1e-14));
  CHECK(f.fxx == Catch::Approx(-2.0).margin(1e-14));
  CHECK(f.ftx == Catch::Approx(0.0).margin(1e-14));
  double fd_tt = (sys.fiber_jet(th + h, x).ft - sys.fiber_jet(th - h, x).ft) / (2 * h);
  CHECK(f.ftt == Catch::Approx(fd_tt).margin(1e-4));
}

TEST_CASE("tangent pushes follow the orbit and the jacobian") {
  SkewSystem sys = SkewSystem::make(reference_params(0.01));
  Point z{0.342, 0.7};
  TangentState t{z, 0.0, 1.0, 0.0, false};
  t = push_tangent(sys, t);
  Point z2 = sys.step(z);
  CHECK(t.z.theta == z2.theta);
  CHECK(t.z.x == z2.x);
  // a pure fiber vector grows by |f_x| = |-2x| in one step
  CHECK(t.log_norm == Catch::Approx(std::log(2.0 * 0.7)).margin(1e-12));
  CHECK(t.v_theta == Catch::Approx(0.0).margin(1e-15));

  TangentState at_crit{{0.25, 0.0}, 0.0, 1.0, 0.0, false};
  at_crit = push_tangent(sys, at_crit);
  CHECK(at_crit.degenerate);
}

TEST_CASE("system construction validates the trapping region") {
  CHECK_THROWS_AS(SkewSystem::make({BaseMap::uniform_linear(16), -5.0, 0.01,
                                    std::nullopt}),
                  ConfigError);
  SkewSystem sys = SkewSystem::make(reference_params(0.0));
  CHECK(sys.alpha() == 0.0);
  CHECK(sys.trap().contains(0.0));
}
