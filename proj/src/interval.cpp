#include "branchpde/interval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "branchpde/detail/solve.hpp"

namespace branchpde {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kTiny = 1e-300;

bool use_images(double s, const KernelAccuracy& acc, Series series) {
  if (series == Series::images) return true;
  if (series == Series::sine) return false;
  return s < acc.t_switch_scale;
}

bool converged(double bound, double sum, double eps) { return bound <= eps * std::max(std::abs(sum), kTiny); }

// Phi(b) - Phi(a) for a <= b without cancellation in either tail.
double normal_diff(double a, double b) {
  if (a >= 0.0) return 0.5 * (std::erfc(a / kSqrt2) - std::erfc(b / kSqrt2));
  if (b <= 0.0) return 0.5 * (std::erfc(-b / kSqrt2) - std::erfc(-a / kSqrt2));
  return 1.0 - 0.5 * std::erfc(b / kSqrt2) - 0.5 * std::erfc(-a / kSqrt2);
}

unit::HitHigh hit_high_images(double s, double y, double eps) {
  const double root = std::sqrt(2.0 * s);
  const double dens_scale = 1.0 / std::sqrt(2.0 * kPi * s * s * s);
  const double rho = std::exp(-2.0 / s);
  const double tail_factor = rho / (1.0 - rho);
  double cdf = 0.0;
  double density = 0.0;
  for (int n = 0; n < 100000; ++n) {
    const double am = 2.0 * n + 1.0 - y;
    const double ap = 2.0 * n + 1.0 + y;
    const double em = std::erfc(am / root);
    cdf += em - std::erfc(ap / root);
    const double km = am * std::exp(-am * am / (2.0 * s)) * dens_scale;
    density += km - ap * std::exp(-ap * ap / (2.0 * s)) * dens_scale;
    if (converged(em * tail_factor, cdf, eps) && converged(km * tail_factor, density, eps)) break;
  }
  return {cdf, y - cdf, density};
}

unit::HitHigh hit_high_sine(double s, double y, double eps) {
  double tail = 0.0;
  double density = 0.0;
  for (int k = 1; k < 100000; ++k) {
    const double decay = std::exp(-0.5 * k * k * kPi * kPi * s);
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    const double sk = std::sin(k * kPi * y);
    tail += sign * 2.0 / (k * kPi) * sk * decay;
    density += sign * k * kPi * sk * decay;
    const double next = std::exp(-0.5 * (k + 1.0) * (k + 1.0) * kPi * kPi * s);
    const double ratio = std::exp(-0.5 * (2.0 * k + 3.0) * kPi * kPi * s);
    const double bound_tail = 2.0 / ((k + 1.0) * kPi) * next / (1.0 - ratio);
    const double bound_dens = (k + 1.0) * kPi * next / (1.0 - ratio) * (k + 2.0) / (k + 1.0);
    if (converged(bound_tail, tail, eps) && converged(bound_dens, density, eps)) break;
  }
  return {y - tail, tail, density};
}

double survival_sine(double s, double y, double eps) {
  double sum = 0.0;
  for (int k = 1; k < 200000; k += 2) {
    sum += 4.0 / (k * kPi) * std::sin(k * kPi * y) * std::exp(-0.5 * k * k * kPi * kPi * s);
    const double next = std::exp(-0.5 * (k + 2.0) * (k + 2.0) * kPi * kPi * s);
    const double ratio = std::exp(-2.0 * (k + 3.0) * kPi * kPi * s);
    if (converged(4.0 / ((k + 2.0) * kPi) * next / (1.0 - ratio), sum, eps)) break;
  }
  return sum;
}

unit::PositionMass position_images(double z, double s, double y, double eps) {
  const double root = std::sqrt(s);
  const double dens_scale = 1.0 / std::sqrt(2.0 * kPi * s);
  auto term = [&](int n, double& m, double& d) {
    const double sh = 2.0 * n;
    m = normal_diff((sh - y) / root, (sh + z - y) / root) - normal_diff((sh + y) / root, (sh + y + z) / root);
    const double a = z - y + sh;
    const double b = z + y + sh;
    d = (std::exp(-a * a / (2.0 * s)) - std::exp(-b * b / (2.0 * s))) * dens_scale;
  };
  // Every argument in shell |n| >= 2 has magnitude >= (2|n| - 2)/sqrt(s); in
  // shell 1 all but one are >= 1/sqrt(s), the last is (2 - y - z)/sqrt(s).
  auto shell_bound = [&](double min_arg) {
    return std::pair{0.5 * std::erfc(min_arg / (kSqrt2 * root)), std::exp(-min_arg * min_arg / (2.0 * s)) * dens_scale};
  };
  double mass = 0.0;
  double density = 0.0;
  term(0, mass, density);
  for (int n = 1; n < 100000; ++n) {
    double mb, db;
    if (n == 1) {
      const auto [m_far, d_far] = shell_bound(1.0);
      const auto [m_near, d_near] = shell_bound(2.0 - y - z);
      mb = 7.0 * m_far + m_near;
      db = 7.0 * d_far + d_near;
    } else {
      const auto [m_b, d_b] = shell_bound(2.0 * n - 2.0);
      mb = 8.0 * m_b;
      db = 4.0 * d_b;
    }
    if (converged(mb, mass, eps) && converged(db, density, eps)) break;
    double m1, d1, m2, d2;
    term(n, m1, d1);
    term(-n, m2, d2);
    mass += m1 + m2;
    density += d1 + d2;
  }
  return {mass, density};
}

unit::PositionMass position_sine(double z, double s, double y, double eps) {
  double mass = 0.0;
  double density = 0.0;
  for (int k = 1; k < 100000; ++k) {
    const double decay = std::exp(-0.5 * k * k * kPi * kPi * s);
    const double sy = std::sin(k * kPi * y);
    const double half = std::sin(0.5 * k * kPi * z);
    mass += 4.0 * decay * sy * half * half / (k * kPi);
    density += 2.0 * decay * sy * std::sin(k * kPi * z);
    const double next = std::exp(-0.5 * (k + 1.0) * (k + 1.0) * kPi * kPi * s);
    const double ratio = std::exp(-0.5 * (2.0 * k + 3.0) * kPi * kPi * s);
    if (converged(4.0 / ((k + 1.0) * kPi) * next / (1.0 - ratio), mass, eps) &&
        converged(2.0 * next / (1.0 - ratio), density, eps))
      break;
  }
  return {mass, density};
}

double unit_position(double x, const Interval& iv) { return (x - iv.lo) / iv.width(); }
double unit_time(double t, const Interval& iv) { return t / (iv.width() * iv.width()); }

void require_interior(double x, const Interval& iv, const char* what) {
  iv.validate();
  if (!iv.contains(x))
    throw DomainError(std::string(what) + ": start point " + std::to_string(x) + " not inside (" +
                      std::to_string(iv.lo) + ", " + std::to_string(iv.hi) + ")");
}

}  // namespace

void Interval::validate() const {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
    throw std::invalid_argument("interval requires finite lo < hi");
}

void KernelAccuracy::validate() const {
  if (!(eps_series > 0.0 && eps_invert > 0.0 && t_switch_scale > 0.0))
    throw std::invalid_argument("kernel accuracy parameters must be positive");
}

double exit_laplace(double beta, double x, const Interval& iv) {
  iv.validate();
  if (!(beta > 0.0)) throw DomainError("exit_laplace: beta must be positive");
  if (!iv.in_closure(x)) throw DomainError("exit_laplace: x outside the closed interval");
  const double k = std::sqrt(2.0 * beta);
  const double xt = std::abs(x - iv.mid());
  const double rt = iv.half_width();
  if (xt >= rt) return 1.0;
  // cosh(k xt)/cosh(k rt) rewritten so that neither cosh overflows.
  return std::exp(k * (xt - rt)) * (1.0 + std::exp(-2.0 * k * xt)) / (1.0 + std::exp(-2.0 * k * rt));
}

double exit_time_survival(double t, double x, const Interval& iv, const KernelAccuracy& acc, Series series) {
  iv.validate();
  if (!(t >= 0.0)) throw DomainError("exit_time_survival: t must be nonnegative");
  if (!iv.in_closure(x)) throw DomainError("exit_time_survival: x outside the interval");
  if (!iv.contains(x)) return 0.0;
  if (t == 0.0) return 1.0;
  return unit::survival(unit_time(t, iv), unit_position(x, iv), acc, series);
}

double exit_time_cdf(double t, double x, const Interval& iv, const KernelAccuracy& acc, Series series) {
  iv.validate();
  if (!(t >= 0.0)) throw DomainError("exit_time_cdf: t must be nonnegative");
  if (!iv.in_closure(x)) throw DomainError("exit_time_cdf: x outside the interval");
  if (!iv.contains(x)) return 1.0;
  if (t == 0.0) return 0.0;
  const double s = unit_time(t, iv);
  const double y = unit_position(x, iv);
  if (use_images(s, acc, series)) {
    return unit::hit_high(s, y, acc, Series::images).cdf + unit::hit_high(s, 1.0 - y, acc, Series::images).cdf;
  }
  return 1.0 - unit::survival(s, y, acc, Series::sine);
}

double exit_side_cdf(double t, double x, Side side, const Interval& iv, const KernelAccuracy& acc, Series series) {
  require_interior(x, iv, "exit_side_cdf");
  if (!(t >= 0.0)) throw DomainError("exit_side_cdf: t must be nonnegative");
  if (t == 0.0) return 0.0;
  const double y = unit_position(x, iv);
  return unit::hit_high(unit_time(t, iv), side == Side::hi ? y : 1.0 - y, acc, series).cdf;
}

double survival_position_cdf(double z, double t, double x, const Interval& iv, const KernelAccuracy& acc,
                             Series series) {
  require_interior(x, iv, "survival_position_cdf");
  if (!(t > 0.0)) throw DomainError("survival_position_cdf: t must be positive");
  if (z <= iv.lo) return 0.0;
  if (z >= iv.hi) return 1.0;
  const double s = unit_time(t, iv);
  const double y = unit_position(x, iv);
  const double total = unit::survival(s, y, acc, series);
  return unit::position_mass(unit_position(z, iv), s, y, acc, series).mass / total;
}

ExitSample sample_exit(double x, const Interval& iv, Stream& rng, const KernelAccuracy& acc) {
  require_interior(x, iv, "sample_exit");
  const double y = unit_position(x, iv);
  const Side side = rng.uniform() < y ? Side::hi : Side::lo;
  const double s = unit::exit_time_given_high(side == Side::hi ? y : 1.0 - y, rng.uniform(), acc);
  return {s * iv.width() * iv.width(), side};
}

double sample_position_given_survival(double t, double x, const Interval& iv, Stream& rng,
                                      const KernelAccuracy& acc) {
  require_interior(x, iv, "sample_position_given_survival");
  if (!(t > 0.0)) throw DomainError("sample_position_given_survival: t must be positive");
  const double z = unit::position_given_survival(unit_time(t, iv), unit_position(x, iv), rng.uniform(), acc);
  const double pos = iv.lo + z * iv.width();
  return std::clamp(pos, std::nextafter(iv.lo, iv.hi), std::nextafter(iv.hi, iv.lo));
}

namespace unit {

HitHigh hit_high(double s, double y, const KernelAccuracy& acc, Series series) {
  if (s <= 0.0) return {0.0, y, 0.0};
  return use_images(s, acc, series) ? hit_high_images(s, y, acc.eps_series) : hit_high_sine(s, y, acc.eps_series);
}

double survival(double s, double y, const KernelAccuracy& acc, Series series) {
  if (s <= 0.0) return 1.0;
  if (use_images(s, acc, series)) {
    return 1.0 - hit_high_images(s, y, acc.eps_series).cdf - hit_high_images(s, 1.0 - y, acc.eps_series).cdf;
  }
  return survival_sine(s, y, acc.eps_series);
}

PositionMass position_mass(double z, double s, double y, const KernelAccuracy& acc, Series series) {
  return use_images(s, acc, series) ? position_images(z, s, y, acc.eps_series)
                                    : position_sine(z, s, y, acc.eps_series);
}

double exit_time_given_high(double y, double u, const KernelAccuracy& acc) {
  // Solve in log space so that both tails converge at a linear rate or better.
  if (u <= 0.5) {
    const double target = u * y;
    const double e = boost::math::erfc_inv(std::min(target, 1.0));
    double guess = (1.0 - y) / (kSqrt2 * e);
    guess = std::isfinite(guess) && guess > 0.0 ? guess * guess : 0.1;
    const double log_target = std::log(target);
    auto f = [&](double s) {
      const HitHigh h = hit_high(s, y, acc);
      return detail::Eval{std::log(h.cdf) - log_target, h.density / h.cdf};
    };
    return detail::solve_increasing_positive(f, guess, acc.eps_invert);
  }
  const double target = (1.0 - u) * y;
  double guess = -2.0 / (kPi * kPi) * std::log(target * kPi / (2.0 * std::sin(kPi * y)));
  if (!(guess > 0.05)) {
    const double e = boost::math::erfc_inv(std::clamp(y - target, kTiny, 1.0));
    guess = (1.0 - y) / (kSqrt2 * e);
    guess = std::isfinite(guess) && guess > 0.0 ? guess * guess : 0.1;
  }
  const double log_target = std::log(target);
  auto f = [&](double s) {
    const HitHigh h = hit_high(s, y, acc);
    return detail::Eval{log_target - std::log(h.tail), h.density / h.tail};
  };
  return detail::solve_increasing_positive(f, guess, acc.eps_invert);
}

double position_given_survival(double s, double y, double u, const KernelAccuracy& acc) {
  const double total = survival(s, y, acc);
  if (!(total >= acc.eps_series))
    throw ConditioningTooRare("survival probability " + std::to_string(total) + " below eps_series");
  // Gaussian guess while killing is negligible, first sine mode afterwards.
  double guess;
  if (s < 0.15) {
    const double q = -kSqrt2 * boost::math::erfc_inv(2.0 * u);
    guess = y + std::sqrt(s) * q;
  } else {
    guess = std::acos(1.0 - 2.0 * u) / kPi;
  }
  guess = std::clamp(guess, 1e-9, 1.0 - 1e-9);
  if (u <= 0.5) {
    const double target = u * total;
    auto f = [&](double z) {
      const PositionMass pm = position_mass(z, s, y, acc);
      return detail::Eval{pm.mass - target, pm.density};
    };
    return detail::solve_increasing_bracketed(f, 0.0, 1.0, guess, acc.eps_invert);
  }
  const double target = (1.0 - u) * total;
  auto f = [&](double z) {
    const PositionMass pm = position_mass(1.0 - z, s, 1.0 - y, acc);
    return detail::Eval{target - pm.mass, pm.density};
  };
  return detail::solve_increasing_bracketed(f, 0.0, 1.0, guess, acc.eps_invert);
}

}  // namespace unit

}  // namespace branchpde
