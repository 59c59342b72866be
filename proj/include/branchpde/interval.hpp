#pragma once

// Exact laws of one-dimensional Brownian motion (generator ½Δ) killed on
// leaving an interval. Everything is evaluated on (0, 1) and mapped to a
// general interval by Brownian scaling: position y = (x - lo)/w, time
// s = t/w² with w = hi - lo.

#include <stdexcept>

#include "branchpde/rng.hpp"

namespace branchpde {

struct Interval {
  double lo = -1.0;
  double hi = 1.0;

  [[nodiscard]] double width() const noexcept { return hi - lo; }
  [[nodiscard]] double mid() const noexcept { return 0.5 * (lo + hi); }
  [[nodiscard]] double half_width() const noexcept { return 0.5 * (hi - lo); }
  [[nodiscard]] bool contains(double x) const noexcept { return lo < x && x < hi; }
  [[nodiscard]] bool in_closure(double x) const noexcept { return lo <= x && x <= hi; }
  /// Throws std::invalid_argument unless lo < hi, both finite.
  void validate() const;
};

struct KernelAccuracy {
  double eps_series = 1e-13;     // relative series-tail bound (sums are <= 1, so also absolute)
  double eps_invert = 1e-12;     // inverse-CDF tolerance, relative in time, absolute in unit position
  double t_switch_scale = 0.5;   // images for t/w² < switch, sine series above
  void validate() const;
};

enum class Series { automatic, images, sine };
enum class Side { lo, hi };

struct ExitSample {
  double eta;
  Side side;
};

struct ConditioningTooRare : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// E[exp(-beta * eta)] for a path started at x.
double exit_laplace(double beta, double x, const Interval& iv);

/// P(eta <= t).
double exit_time_cdf(double t, double x, const Interval& iv, const KernelAccuracy& acc = {},
                     Series series = Series::automatic);
/// P(eta > t), accurate when small.
double exit_time_survival(double t, double x, const Interval& iv, const KernelAccuracy& acc = {},
                          Series series = Series::automatic);
/// P(eta <= t, exit through `side`).
double exit_side_cdf(double t, double x, Side side, const Interval& iv, const KernelAccuracy& acc = {},
                     Series series = Series::automatic);
/// P(X_t <= z | eta > t).
double survival_position_cdf(double z, double t, double x, const Interval& iv, const KernelAccuracy& acc = {},
                             Series series = Series::automatic);

ExitSample sample_exit(double x, const Interval& iv, Stream& rng, const KernelAccuracy& acc = {});

/// Draws X_t given eta > t. Result lies strictly inside iv.
double sample_position_given_survival(double t, double x, const Interval& iv, Stream& rng,
                                      const KernelAccuracy& acc = {});

namespace unit {

/// Exit through 1 by time s from y: cdf = P(eta <= s, hit 1), tail = y - cdf,
/// density = d cdf / ds.
struct HitHigh {
  double cdf;
  double tail;
  double density;
};

HitHigh hit_high(double s, double y, const KernelAccuracy& acc, Series series = Series::automatic);

/// P(eta > s) from y.
double survival(double s, double y, const KernelAccuracy& acc, Series series = Series::automatic);

/// Unnormalized position law on survival: mass = P(X_s <= z, eta > s),
/// density = its z-derivative.
struct PositionMass {
  double mass;
  double density;
};

PositionMass position_mass(double z, double s, double y, const KernelAccuracy& acc,
                           Series series = Series::automatic);

/// Inverse of s -> P(eta <= s | hit 1) at probability u.
double exit_time_given_high(double y, double u, const KernelAccuracy& acc);

/// Inverse of z -> P(X_s <= z | eta > s) at probability u. Throws
/// ConditioningTooRare if P(eta > s) < acc.eps_series.
double position_given_survival(double s, double y, double u, const KernelAccuracy& acc);

}  // namespace unit

}  // namespace branchpde
