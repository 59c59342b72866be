#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"

#include "branchpde/branching.hpp"
#include "branchpde/oracles.hpp"
#include "branchpde/registry.hpp"
#include "branchpde/scenarios.hpp"

using namespace branchpde;

TEST_CASE("offspring law") {
  Stream rng(21, 0);
  const auto single = scenarios::cubic_tan_sum(2, 0.3);
  for (int i = 0; i < 100; ++i) CHECK(sample_offspring(single.terms, rng) == 0);

  const auto ex1 = scenarios::cubic_sech(0.3);
  const int n = 1000000;
  long first = 0;
  for (int i = 0; i < n; ++i) first += sample_offspring(ex1.terms, rng) == 0;
  CHECK(std::abs(first / double(n) - 0.5) < 3 * std::sqrt(0.25 / n));

  const auto ex2 = scenarios::quadratic_tan(0.14);
  double mean = 0;
  for (int i = 0; i < n; ++i) mean += total(ex2.terms[sample_offspring(ex2.terms, rng)].l);
  mean /= n;
  CHECK(std::abs(mean - 1.5) < 3 * std::sqrt(0.75 * 0.25 * 4 / n));
  CHECK(ex2.mean_offspring() == doctest::Approx(1.5));
}

TEST_CASE("unit factors give psi identically one") {
  ProblemSpec s;
  s.beta = 2.0;
  s.rect = Rectangle::cube(2, 0.6);
  s.terms = {{{0}, ScalarField::constant(0.3), 0.3}, {{2}, ScalarField::constant(0.7), 0.7}};
  s.h = ScalarField::constant(1.0);
  const double x[2] = {0.1, -0.2};
  for (std::uint64_t i = 0; i < 2000; ++i) CHECK(simulate_psi(x, s, Stream::for_sample(3, i)).psi == 1.0);
}

TEST_CASE("linear problem: mean of psi matches the closed form") {
  const auto s = scenarios::linear(1.0, 0.5, "exp:1.5");
  const double x[1] = {0.2};
  const int n = 400000;
  double mean = 0, m2 = 0;
  for (int i = 0; i < n; ++i) {
    const double v = simulate_psi(x, s, Stream::for_sample(4, i)).psi;
    const double d = v - mean;
    mean += d / (i + 1);
    m2 += d * (v - mean);
  }
  const double se = std::sqrt(m2 / (n - 1) / n);
  const double phi = oracles::closed_phi(0.2, 1.0, 0.5, std::exp(-0.75), std::exp(0.75)).phi;
  CHECK(std::abs(mean - phi) < 3 * se);
}

TEST_CASE("identical streams give identical trees") {
  const auto s = scenarios::cubic_sech(0.9);
  const double x[1] = {0.0};
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto a = simulate_psi(x, s, Stream::for_sample(99, i));
    const auto b = simulate_psi(x, s, Stream::for_sample(99, i));
    CHECK(a.psi == b.psi);
    CHECK(a.particles == b.particles);
    CHECK(a.generations == b.generations);
    CHECK(a.root_pos == b.root_pos);
  }
}

TEST_CASE("budget violations are reported, never truncated") {
  ProblemSpec s;
  s.beta = 50.0;
  s.rect = Rectangle::cube(1, 3.0);
  s.terms = {{{2}, ScalarField::constant(1.0), 1.0}};
  s.h = ScalarField::constant(1.0);
  s.budget.max_particles = 1000;
  const double x[1] = {0.0};
  CHECK_THROWS_AS(simulate_psi(x, s, Stream::for_sample(1, 0)), BudgetExceeded);
  s.budget = {1'000'000, 5};
  CHECK_THROWS_AS(simulate_psi(x, s, Stream::for_sample(1, 0)), BudgetExceeded);
}

TEST_CASE("tree sizes have a geometric tail in the subcritical regime") {
  const auto s = scenarios::cubic_sech(0.5);
  const double x[1] = {0.0};
  const int n = 200000;
  std::map<std::uint64_t, long> sizes;
  for (int i = 0; i < n; ++i) ++sizes[simulate_psi(x, s, Stream::for_sample(5, i)).particles];
  auto tail = [&](std::uint64_t k) {
    long c = 0;
    for (const auto& [size, count] : sizes)
      if (size >= k) c += count;
    return double(c) / n;
  };
  // Tail ratios over strides of 6 particles stay well below one; a critical
  // tree would give ratios near one.
  for (std::uint64_t k : {4, 10, 16}) {
    const double ratio = tail(k + 6) / tail(k);
    MESSAGE("P(N >= " << k + 6 << ") / P(N >= " << k << ") = " << ratio);
    CHECK(ratio < 0.35);
  }
  CHECK(tail(40) < 1e-4);
}

TEST_CASE("problem validation") {
  auto s = scenarios::cubic_sech(0.3);
  s.terms[0].p = 0.4;
  CHECK_THROWS_AS(s.validate(), InvalidProblem);
  auto g = scenarios::gradient_demo(1.0, 0.3);
  CHECK_NOTHROW(g.validate());
  g.b[0] = ScalarField::constant(1.0);
  CHECK_THROWS_AS(g.validate(), InvalidProblem);
  auto d2 = scenarios::gradient_demo(1.0, 0.3);
  d2.rect = Rectangle::cube(2, 0.3);
  CHECK_THROWS_AS(d2.validate(), InvalidProblem);
}
