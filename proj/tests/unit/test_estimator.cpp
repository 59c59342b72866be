#include <cmath>
#include <vector>

#include "doctest.h"

#include "branchpde/estimator.hpp"
#include "branchpde/oracles.hpp"
#include "branchpde/scenarios.hpp"

using namespace branchpde;

namespace {

double sech_solution(double x) { return std::sqrt(2.0) / std::cosh(x); }

}  // namespace

TEST_CASE("moments merge equals sequential accumulation") {
  Moments all, a, b;
  Stream rng(1, 1);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * 3 + 1;
    all.add(v);
    (i < 377 ? a : b).add(v);
  }
  a.merge(b);
  CHECK(a.n == all.n);
  CHECK(a.mean == doctest::Approx(all.mean).epsilon(1e-14));
  CHECK(a.m2 == doctest::Approx(all.m2).epsilon(1e-12));
}

TEST_CASE("value estimate covers the exact solution") {
  const auto spec = scenarios::cubic_sech(0.5);
  const double x[1] = {0.2};
  const auto res = estimate_value(spec, x, 200000, 7);
  CHECK(res.ci_contains(sech_solution(0.2)));
  CHECK(res.n == 200000);
  CHECK(res.seed == 7);
  CHECK(res.std_over_mean() == doctest::Approx(res.std / res.mean));
}

TEST_CASE("results do not depend on the thread count") {
  const auto spec = scenarios::quadratic_tan(0.14);
  const double x[1] = {0.05};
  const auto one = estimate_value(spec, x, 30000, 42, {.threads = 1, .block_size = 1000});
  const auto three = estimate_value(spec, x, 30000, 42, {.threads = 3, .block_size = 1000});
  CHECK(one.mean == three.mean);
  CHECK(one.std == three.std);
  CHECK(one.diagnostics.max_tree_size == three.diagnostics.max_tree_size);
  const auto other = estimate_value(spec, x, 30000, 43, {.threads = 1, .block_size = 1000});
  CHECK(other.mean != one.mean);
}

TEST_CASE("99% confidence intervals cover at the nominal rate") {
  const auto spec = scenarios::cubic_sech(0.3);
  const double x[1] = {0.0};
  int covered = 0;
  for (std::uint64_t rep = 0; rep < 200; ++rep)
    covered += estimate_value(spec, x, 10000, 1000 + rep, {.threads = 1}).ci_contains(sech_solution(0.0));
  MESSAGE("coverage " << covered << "/200");
  CHECK(covered >= 190);
}

TEST_CASE("std/mean is undefined when the interval contains zero") {
  const auto res = estimate_mean([](std::uint64_t i) { return SampleOutcome{i % 2 ? 1.0 : -1.0}; }, 1000, 0);
  CHECK(std::isnan(res.std_over_mean()));
  CHECK_THROWS(estimate_mean([](std::uint64_t) { return SampleOutcome{1.0}; }, 1, 0));
  CHECK_THROWS_AS(estimate_mean([](std::uint64_t) { return SampleOutcome{NAN}; }, 10, 0), NonFinite);
}

TEST_CASE("gradient of a linear problem matches the closed form") {
  const auto spec = scenarios::linear(1.0, 0.5, "exp:1.5");
  const auto res = estimate_gradient_1d(spec, 0.2, 400000, 3);
  const double dphi = oracles::closed_phi(0.2, 1.0, 0.5, std::exp(-0.75), std::exp(0.75)).dphi;
  CHECK(res.ci_contains(dphi));
}

TEST_CASE("gradient at the centre of a symmetric problem vanishes") {
  const auto spec = scenarios::cubic_sech(0.4);
  const auto res = estimate_gradient_1d(spec, 0.0, 200000, 4);
  CHECK(res.ci_contains(0.0));
  CHECK(std::isnan(res.std_over_mean()));
}

TEST_CASE("gradient agrees with a paired central difference") {
  const auto spec = scenarios::cubic_sech(0.4);
  const double x0 = 0.15, eps = 0.01;
  const auto grad = estimate_gradient_1d(spec, x0, 200000, 5);
  const auto fd = estimate_mean(
      [&](std::uint64_t i) {
        const double xp[1] = {x0 + eps}, xm[1] = {x0 - eps};
        const auto s = Stream::for_sample(6, i);
        const double up = simulate_psi(xp, spec, s).psi;
        const double dn = simulate_psi(xm, spec, s).psi;
        return SampleOutcome{(up - dn) / (2 * eps)};
      },
      200000, 6);
  const double exact = -std::sqrt(2.0) * std::tanh(x0) / std::cosh(x0);
  CHECK(grad.ci_contains(exact));
  // Both are unbiased up to O(eps^2); their intervals must overlap.
  CHECK(grad.ci_lo <= fd.ci_hi);
  CHECK(fd.ci_lo <= grad.ci_hi);
}

TEST_CASE("gradient-dependent nonlinearity: value and derivative of the exact solution") {
  const auto spec = scenarios::gradient_demo(1.0, 0.3);
  const double x = 0.1;
  const double xs[1] = {x};
  const auto v = estimate_value(spec, xs, 200000, 8);
  const auto g = estimate_gradient_1d(spec, x, 200000, 9);
  MESSAGE("value " << v.mean << " +- " << v.half_width() << ", gradient " << g.mean << " +- " << g.half_width());
  CHECK(v.ci_contains(std::cos(x)));
  CHECK(g.ci_contains(-std::sin(x)));
}

TEST_CASE("gradient estimates are rejected beyond one dimension") {
  CHECK_THROWS_AS(estimate_gradient_1d(scenarios::cubic_tan_sum(2, 0.2), 0.0, 100, 1), GradientUnsupported);
}

TEST_CASE("error shrinks like n^(-1/2)") {
  const auto spec = scenarios::cubic_sech(0.5);
  const double x[1] = {0.1};
  const double exact = sech_solution(0.1);
  std::vector<double> mse;
  for (std::uint64_t n : {2000, 32000}) {
    double sq = 0;
    for (std::uint64_t rep = 0; rep < 40; ++rep) {
      const double e = estimate_value(spec, x, n, 500 + rep, {.threads = 1}).mean - exact;
      sq += e * e;
    }
    mse.push_back(sq / 40);
  }
  const double slope = 0.5 * std::log(mse[1] / mse[0]) / std::log(16.0);
  MESSAGE("rms error slope " << slope);
  CHECK(slope == doctest::Approx(-0.5).epsilon(0.3));
}
