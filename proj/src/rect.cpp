#include "branchpde/rect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace branchpde {

Rectangle Rectangle::cube(std::size_t dim, double half_width) {
  Rectangle r;
  r.sides.assign(dim, Interval{-half_width, half_width});
  r.validate();
  return r;
}

bool Rectangle::contains(std::span<const double> x) const noexcept {
  if (x.size() != sides.size()) return false;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (!sides[j].contains(x[j])) return false;
  return true;
}

bool Rectangle::in_closure(std::span<const double> x) const noexcept {
  if (x.size() != sides.size()) return false;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (!sides[j].in_closure(x[j])) return false;
  return true;
}

double Rectangle::distance_to_boundary(std::span<const double> x) const noexcept {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < sides.size(); ++j) d = std::min({d, x[j] - sides[j].lo, sides[j].hi - x[j]});
  return std::max(d, 0.0);
}

std::vector<double> Rectangle::center() const {
  std::vector<double> c;
  c.reserve(sides.size());
  for (const auto& iv : sides) c.push_back(iv.mid());
  return c;
}

bool Rectangle::is_centered_cube() const noexcept {
  if (sides.empty()) return false;
  for (const auto& iv : sides)
    if (iv.lo != -sides.front().hi || iv.hi != sides.front().hi) return false;
  return true;
}

void Rectangle::validate() const {
  if (sides.empty()) throw std::invalid_argument("rectangle needs at least one dimension");
  for (const auto& iv : sides) iv.validate();
}

void sample_arrival(std::span<const double> x, const Rectangle& rect, double clock_rate, Stream& rng,
                    const KernelAccuracy& acc, Arrival& out) {
  if (!rect.contains(x)) throw DegenerateStart("sample_arrival: start point not strictly inside the rectangle");
  if (!(clock_rate > 0.0)) throw std::invalid_argument("sample_arrival: clock rate must be positive");
  const std::size_t d = rect.dim();
  const double tau = rng.exponential(clock_rate);
  double eta = std::numeric_limits<double>::infinity();
  std::size_t argmin = 0;
  Side side = Side::lo;
  for (std::size_t j = 0; j < d; ++j) {
    const ExitSample e = sample_exit(x[j], rect.sides[j], rng, acc);
    if (e.eta < eta) {
      eta = e.eta;
      argmin = j;
      side = e.side;
    }
  }
  out.pos.resize(d);
  if (eta <= tau) {
    // Given the first exit at time eta through coordinate argmin, the other
    // coordinates are independent and only conditioned on surviving to eta.
    out.exited = true;
    out.dt = eta;
    out.exit_coord = argmin;
    out.exit_side = side;
    for (std::size_t j = 0; j < d; ++j) {
      if (j == argmin) out.pos[j] = side == Side::hi ? rect.sides[j].hi : rect.sides[j].lo;
      else out.pos[j] = sample_position_given_survival(eta, x[j], rect.sides[j], rng, acc);
    }
  } else {
    out.exited = false;
    out.dt = tau;
    out.exit_coord = 0;
    out.exit_side = Side::lo;
    for (std::size_t j = 0; j < d; ++j) out.pos[j] = sample_position_given_survival(tau, x[j], rect.sides[j], rng, acc);
  }
}

Arrival sample_arrival(std::span<const double> x, const Rectangle& rect, double clock_rate, Stream& rng,
                       const KernelAccuracy& acc) {
  Arrival a;
  sample_arrival(x, rect, clock_rate, rng, acc, a);
  return a;
}

}  // namespace branchpde
