#include <cmath>

#include "doctest.h"

#include "branchpde/interval.hpp"
#include "branchpde/oracles.hpp"
#include "branchpde/scenarios.hpp"

using namespace branchpde;
using namespace branchpde::oracles;

TEST_CASE("BVP oracle reproduces the cubic sech solution") {
  const auto spec = scenarios::cubic_sech(0.3);
  const double h = std::sqrt(2.0) / std::cosh(0.3);
  const auto sol = solve_bvp_1d(nonlinearity_of(spec), h, h, 0.3);
  CHECK(std::abs(sol.at(0.0) - std::sqrt(2.0)) < 1e-8);
  CHECK(std::abs(sol.at(-0.2) - std::sqrt(2.0) / std::cosh(0.2)) < 1e-8);
  CHECK(sol.residual < 1e-9);
}

TEST_CASE("BVP oracle reproduces the quadratic tan solution") {
  const auto spec = scenarios::quadratic_tan(0.14);
  const double h = 1.0 + 2.0 * std::tan(0.14) * std::tan(0.14);
  const auto sol = solve_bvp_1d(nonlinearity_of(spec), h, h, 0.14);
  CHECK(std::abs(sol.at(0.0) - 1.0) < 1e-8);
  CHECK(sol.residual < 1e-9);
}

TEST_CASE("BVP oracle self-convergence under grid doubling") {
  const auto spec = scenarios::cubic_sech(0.3);
  const double h = std::sqrt(2.0) / std::cosh(0.3);
  const auto a = solve_bvp_1d(nonlinearity_of(spec), h, h, 0.3, 2001);
  const auto b = solve_bvp_1d(nonlinearity_of(spec), h, h, 0.3, 4001);
  CHECK(std::abs(a.at(0.0) - b.at(0.0)) < 1e-8);
}

TEST_CASE("BVP oracle: harmonic problem with equal data is constant") {
  BvpNonlinearity zero{[](double, double) { return 0.0; }, [](double, double) { return 0.0; }};
  const auto sol = solve_bvp_1d(zero, 2.5, 2.5, 1.0, 101);
  for (double v : sol.values) CHECK(v == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("closed_phi: boundary values, symmetry and the ODE") {
  const double beta = 1.3, r = 0.7;
  CHECK(closed_phi(r, beta, r, 2.0, 5.0).phi == doctest::Approx(5.0));
  CHECK(closed_phi(-r, beta, r, 2.0, 5.0).phi == doctest::Approx(2.0));
  CHECK(closed_phi(0.0, 1.0, 1.0, 1.0, 1.0).phi == doctest::Approx(1.0 / std::cosh(std::sqrt(2.0))).epsilon(1e-14));
  CHECK(closed_phi(0.0, 1.0, 1.0, 1.0, 1.0).phi == doctest::Approx(exit_laplace(1.0, 0.0, {-1, 1})).epsilon(1e-14));
  CHECK(std::abs(closed_phi(0.0, beta, r, 3.0, 3.0).dphi) < 1e-14);
  for (double x : {-0.5, -0.1, 0.2, 0.66}) {
    // Analytic identity phi'' = 2 beta phi, via the derivative of dphi.
    const double e = 1e-5;
    const double d2 = (closed_phi(x + e, beta, r, 2.0, 5.0).dphi - closed_phi(x - e, beta, r, 2.0, 5.0).dphi) / (2 * e);
    CHECK(0.5 * d2 - beta * closed_phi(x, beta, r, 2.0, 5.0).phi == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
    const double d1 = (closed_phi(x + e, beta, r, 2.0, 5.0).phi - closed_phi(x - e, beta, r, 2.0, 5.0).phi) / (2 * e);
    CHECK(d1 == doctest::Approx(closed_phi(x, beta, r, 2.0, 5.0).dphi).epsilon(1e-8));
  }
}

TEST_CASE("Euler exit oracle agrees with the exact exit-time CDF") {
  const Interval iv{-0.25, 0.25};
  const double dt = 1e-5;
  const auto emp = euler_exit_mc(0.0, iv, dt, 100000, Stream(5, 5));
  CHECK(emp.censored == 0);
  const double band = emp.dkw_band(1e-3);
  // Discrete monitoring detects exits late by O(sqrt(dt)) in space.
  const double slack = std::sqrt(dt) / iv.width();
  double worst = 0;
  for (int i = 1; i <= 60; ++i) {
    const double t = 0.005 * i;
    worst = std::max(worst, std::abs(emp.cdf(t) - exit_time_cdf(t, 0.0, iv)));
  }
  MESSAGE("max |F_euler - F_exact| = " << worst << ", band " << band << " + slack " << slack);
  CHECK(worst < band + slack);
  const double p_hi = double(emp.exits_high) / 100000.0;
  CHECK(std::abs(p_hi - 0.5) < 3 * std::sqrt(0.25 / 100000.0));
}

TEST_CASE("Euler exit oracle respects Brownian scaling") {
  const double dt = 4e-5;
  const auto small = euler_exit_mc(0.3, {0, 1}, dt, 4000, Stream(6, 1));
  const auto big = euler_exit_mc(0.6, {0, 2}, 4 * dt, 4000, Stream(6, 2));
  const double band = small.dkw_band(1e-3) + big.dkw_band(1e-3);
  for (double t : {0.01, 0.05, 0.1, 0.3, 0.6}) CHECK(std::abs(small.cdf(t) - big.cdf(4 * t)) < band);
}
