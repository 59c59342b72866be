#include "branchpde/kernel_suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "branchpde/interval.hpp"
#include "branchpde/rect.hpp"
#include "branchpde/rng.hpp"

namespace branchpde {
namespace {

constexpr double kSeriesBound = 1e-10;

KernelCheck dual_series() {
  const KernelAccuracy acc;
  double worst = 0.0;
  for (int i = 1; i < 50; ++i) {
    const double y = i / 50.0;
    for (int k = 0; k <= 22; ++k) {
      const double s = 0.15 + 0.05 * k;
      worst = std::max(worst, std::abs(unit::survival(s, y, acc, Series::images) -
                                       unit::survival(s, y, acc, Series::sine)));
      worst = std::max(worst, std::abs(unit::hit_high(s, y, acc, Series::images).cdf -
                                       unit::hit_high(s, y, acc, Series::sine).cdf));
      for (double z : {0.1, 0.35, 0.6, 0.85})
        worst = std::max(worst, std::abs(unit::position_mass(z, s, y, acc, Series::images).mass -
                                         unit::position_mass(z, s, y, acc, Series::sine).mass));
    }
  }
  return {"dual series agreement", worst < kSeriesBound, worst, kSeriesBound};
}

struct LaplaceCase {
  double beta;
  double x;
  Interval iv;
};

std::vector<KernelCheck> exit_laws(const KernelSuiteOptions& opt) {
  const LaplaceCase cases[] = {{1.0, 0.0, {-1.0, 1.0}}, {2.0, 0.3, {-0.5, 0.7}}, {0.5, -0.8, {-1.0, 1.0}}};
  std::vector<KernelCheck> out;
  int index = 0;
  for (const auto& c : cases) {
    Stream rng(opt.seed, 100 + index);
    double sum = 0.0;
    double sum2 = 0.0;
    std::uint64_t high = 0;
    for (std::uint64_t i = 0; i < opt.samples; ++i) {
      const ExitSample e = sample_exit(c.x, c.iv, rng);
      const double v = std::exp(-c.beta * e.eta);
      sum += v;
      sum2 += v * v;
      high += e.side == Side::hi;
    }
    const double n = static_cast<double>(opt.samples);
    const double mean = sum / n;
    const double se = std::sqrt(std::max(0.0, sum2 / n - mean * mean) / n);
    char tag[64];
    std::snprintf(tag, sizeof tag, " (x=%g, beta=%g)", c.x, c.beta);
    out.push_back({std::string("exit Laplace transform") + tag, std::abs(mean - exit_laplace(c.beta, c.x, c.iv)) <= 3 * se,
                   std::abs(mean - exit_laplace(c.beta, c.x, c.iv)), 3 * se});
    const double p = (c.x - c.iv.lo) / c.iv.width();
    const double side_se = std::sqrt(p * (1 - p) / n);
    const double freq = static_cast<double>(high) / n;
    out.push_back({std::string("upper exit frequency") + tag, std::abs(freq - p) <= 3 * side_se, std::abs(freq - p), 3 * side_se});
    ++index;
  }
  return out;
}

std::vector<KernelCheck> product_survival(const KernelSuiteOptions& opt) {
  const Rectangle rect{{{-0.5, 0.5}, {-0.3, 0.6}}};
  const double x[2] = {0.1, 0.0};
  const double times[] = {0.02, 0.05, 0.1};
  std::uint64_t survived[3] = {};
  Stream rng(opt.seed, 200);
  Arrival a;
  for (std::uint64_t i = 0; i < opt.samples; ++i) {
    sample_arrival(x, rect, 1e-12, rng, {}, a);  // the clock effectively never rings
    for (int k = 0; k < 3; ++k) survived[k] += a.dt > times[k];
  }
  std::vector<KernelCheck> out;
  const double n = static_cast<double>(opt.samples);
  for (int k = 0; k < 3; ++k) {
    const double p = exit_time_survival(times[k], x[0], rect.sides[0]) * exit_time_survival(times[k], x[1], rect.sides[1]);
    const double bound = 3 * std::sqrt(p * (1 - p) / n);
    const double diff = std::abs(survived[k] / n - p);
    char name[64];
    std::snprintf(name, sizeof name, "d=2 product survival at t=%g", times[k]);
    out.push_back({name, diff <= bound, diff, bound});
  }
  return out;
}

}  // namespace

std::vector<KernelCheck> run_kernel_suite(const KernelSuiteOptions& options) {
  std::vector<KernelCheck> checks{dual_series()};
  for (auto& c : exit_laws(options)) checks.push_back(std::move(c));
  for (auto& c : product_survival(options)) checks.push_back(std::move(c));
  return checks;
}

}  // namespace branchpde
