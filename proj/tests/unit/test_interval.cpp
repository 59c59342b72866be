#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "doctest.h"

#include "branchpde/interval.hpp"

using namespace branchpde;

namespace {

const KernelAccuracy kAcc{};

struct Moments {
  double mean = 0, m2 = 0;
  long n = 0;
  void add(double v) {
    ++n;
    const double d = v - mean;
    mean += d / n;
    m2 += d * (v - mean);
  }
  double se() const { return std::sqrt(m2 / (n - 1) / n); }
  double var() const { return m2 / (n - 1); }
};

}  // namespace

TEST_CASE("exit_laplace closed form") {
  CHECK(exit_laplace(1.0, 0.0, {-1, 1}) == doctest::Approx(1.0 / std::cosh(std::sqrt(2.0))).epsilon(1e-15));
  CHECK(exit_laplace(1.0, 0.0, {-1, 1}) == doctest::Approx(0.45911).epsilon(1e-5));
  CHECK(exit_laplace(3.0, 1.0, {-1, 1}) == 1.0);
  CHECK(exit_laplace(3.0, -1.0, {-1, 1}) == 1.0);
  CHECK(exit_laplace(1.0, 0.0, {-0.31, 0.31}) == doctest::Approx(1.0 / std::cosh(std::sqrt(2.0) * 0.31)));
  // Translation invariance and no overflow for huge arguments.
  CHECK(exit_laplace(1.0, 5.3, {5, 7}) == doctest::Approx(std::cosh(std::sqrt(2.0) * 0.7) / std::cosh(std::sqrt(2.0))));
  CHECK(exit_laplace(1e6, 0.0, {-1, 1}) >= 0.0);
  CHECK_THROWS_AS(exit_laplace(1.0, 1.5, {-1, 1}), DomainError);
}

TEST_CASE("dual-series agreement on 100 random points in the overlap window") {
  Stream rng(1, 1);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const double s = 0.15 + 1.1 * rng.uniform();
    const double y = rng.uniform();
    const auto a = unit::hit_high(s, y, kAcc, Series::images);
    const auto b = unit::hit_high(s, y, kAcc, Series::sine);
    worst = std::max({worst, std::abs(a.cdf - b.cdf), std::abs(a.tail - b.tail)});
    CHECK(a.density == doctest::Approx(b.density).epsilon(1e-9));
    const double sa = unit::survival(s, y, kAcc, Series::images);
    const double sb = unit::survival(s, y, kAcc, Series::sine);
    worst = std::max(worst, std::abs(sa - sb));
    const double z = rng.uniform();
    const auto pa = unit::position_mass(z, s, y, kAcc, Series::images);
    const auto pb = unit::position_mass(z, s, y, kAcc, Series::sine);
    worst = std::max(worst, std::abs(pa.mass - pb.mass));
    CHECK(pa.density == doctest::Approx(pb.density).epsilon(1e-9));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("exit-time CDF is monotone and reaches one") {
  const Interval iv{-1, 1};
  for (double x : {-0.9, -0.3, 0.0, 0.55, 0.99}) {
    double prev = 0;
    for (int i = 0; i <= 400; ++i) {
      const double t = 1e-4 * std::pow(1.04, i);
      const double c = exit_time_cdf(t, x, iv);
      CHECK(c >= prev - 1e-15);
      CHECK(c <= 1.0);
      prev = c;
    }
    CHECK(exit_time_cdf(200.0, x, iv) == doctest::Approx(1.0));
    CHECK(exit_time_cdf(0.0, x, iv) == 0.0);
  }
}

TEST_CASE("series cross-check at t = 1 on (-1, 1)") {
  const Interval iv{-1, 1};
  CHECK(std::abs(exit_time_cdf(1.0, 0.0, iv, kAcc, Series::images) - exit_time_cdf(1.0, 0.0, iv, kAcc, Series::sine)) < 1e-10);
}

TEST_CASE("Laplace consistency by quadrature of the survival function") {
  // E[e^{-b eta}] = 1 - b * int_0^inf e^{-b t} P(eta > t) dt
  const Interval iv{-1, 1};
  for (double beta : {0.5, 1.0, 4.0}) {
    for (double x : {0.0, 0.4, -0.85}) {
      auto f = [&](double t) { return std::exp(-beta * t) * exit_time_survival(t, x, iv); };
      const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 0.5, 15, 1e-13) +
                              boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.5, 200.0, 15, 1e-13);
      CHECK(1.0 - beta * integral == doctest::Approx(exit_laplace(beta, x, iv)).epsilon(1e-9));
    }
  }
}

TEST_CASE("exit side CDFs add up and split by the harmonic probability") {
  const Interval iv{-2, 1};
  for (double x : {-1.5, 0.0, 0.9}) {
    const double t = 0.7;
    CHECK(exit_side_cdf(t, x, Side::lo, iv) + exit_side_cdf(t, x, Side::hi, iv) ==
          doctest::Approx(exit_time_cdf(t, x, iv)).epsilon(1e-12));
    CHECK(exit_side_cdf(1e4, x, Side::hi, iv) == doctest::Approx((x + 2.0) / 3.0));
  }
}

TEST_CASE("Brownian scaling covariance") {
  const Interval unit_iv{0, 1};
  const Interval big{3, 5};  // width 2
  for (double t : {0.01, 0.1, 0.4, 2.0}) {
    CHECK(exit_time_cdf(4 * t, 3.6, big) == doctest::Approx(exit_time_cdf(t, 0.3, unit_iv)).epsilon(1e-13));
    CHECK(survival_position_cdf(4.2, 4 * t, 3.6, big) ==
          doctest::Approx(survival_position_cdf(0.6, t, 0.3, unit_iv)).epsilon(1e-12));
  }
}

TEST_CASE("inverse CDFs invert the series") {
  for (double y : {1e-6, 0.02, 0.5, 0.93}) {
    for (double u : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.51, 0.9, 1 - 1e-9, 1 - 1e-15}) {
      const double s = unit::exit_time_given_high(y, u, kAcc);
      const auto h = unit::hit_high(s, y, kAcc);
      if (u <= 0.5) CHECK(h.cdf / y == doctest::Approx(u).epsilon(1e-9));
      else CHECK(h.tail / y == doctest::Approx(1 - u).epsilon(1e-9));
    }
  }
  for (double s : {1e-6, 0.01, 0.3, 0.7, 3.0}) {
    for (double y : {0.01, 0.5, 0.8}) {
      if (unit::survival(s, y, kAcc) < 1e-13) continue;
      for (double u : {1e-9, 0.2, 0.5, 0.77, 1 - 1e-9}) {
        const double z = unit::position_given_survival(s, y, u, kAcc);
        CHECK(z >= 0.0);
        CHECK(z <= 1.0);
        const double total = unit::survival(s, y, kAcc);
        const double cdf = unit::position_mass(z, s, y, kAcc).mass / total;
        CHECK(std::abs(cdf - u) < 1e-8);
      }
    }
  }
}

TEST_CASE("rare conditioning is refused") {
  Stream rng(3, 3);
  CHECK_THROWS_AS(sample_position_given_survival(100.0, 0.0, {-1, 1}, rng), ConditioningTooRare);
}

TEST_CASE("sample_exit: side probabilities and Monte Carlo Laplace transform") {
  const Interval iv{-1, 1};
  Stream rng(2024, 1);
  const int n = 1000000;
  Moments lap;
  long hi = 0;
  for (int i = 0; i < n; ++i) {
    const auto e = sample_exit(0.0, iv, rng);
    lap.add(std::exp(-e.eta));
    hi += e.side == Side::hi;
  }
  CHECK(std::abs(lap.mean - exit_laplace(1.0, 0.0, iv)) < 3 * lap.se());
  CHECK(std::abs(hi / double(n) - 0.5) < 3 * std::sqrt(0.25 / n));

  long hi2 = 0;
  const int n2 = 200000;
  for (int i = 0; i < n2; ++i) hi2 += sample_exit(0.75, {0, 1}, rng).side == Side::hi;
  CHECK(std::abs(hi2 / double(n2) - 0.75) < 3 * std::sqrt(0.75 * 0.25 / n2));
}

TEST_CASE("survival-conditioned position: small-time Gaussian limit and symmetry") {
  const Interval iv{-1, 1};
  Stream rng(77, 0);
  const double t = 1e-4;
  Moments m;
  for (int i = 0; i < 1000000; ++i) m.add(sample_position_given_survival(t, 0.0, iv, rng));
  CHECK(std::abs(m.mean) < 3 * m.se());
  CHECK(m.var() == doctest::Approx(t).epsilon(0.05));
}

TEST_CASE("survival-conditioned position: spectral limit") {
  const Interval iv{-1, 1};
  Stream rng(78, 0);
  const int n = 1000000;
  std::vector<double> z(n);
  for (auto& v : z) v = sample_position_given_survival(5.0, 0.0, iv, rng);
  std::sort(z.begin(), z.end());
  double ks = 0;
  for (int i = 0; i < n; ++i) {
    const double c = 0.5 * (1.0 - std::cos(std::numbers::pi * (z[i] + 1.0) / 2.0));
    ks = std::max({ks, std::abs(c - double(i) / n), std::abs(c - double(i + 1) / n)});
  }
  CHECK(ks < 0.002);
}
