#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "branchpde/interval.hpp"
#include "branchpde/rng.hpp"

namespace branchpde {

struct Rectangle {
  std::vector<Interval> sides;

  static Rectangle cube(std::size_t dim, double half_width);

  [[nodiscard]] std::size_t dim() const noexcept { return sides.size(); }
  [[nodiscard]] bool contains(std::span<const double> x) const noexcept;
  [[nodiscard]] bool in_closure(std::span<const double> x) const noexcept;
  /// Distance to the boundary (min over faces); 0 outside.
  [[nodiscard]] double distance_to_boundary(std::span<const double> x) const noexcept;
  [[nodiscard]] std::vector<double> center() const;
  /// True when every side is the same symmetric interval (-r, r).
  [[nodiscard]] bool is_centered_cube() const noexcept;
  void validate() const;
};

struct DegenerateStart : std::domain_error {
  using std::domain_error::domain_error;
};

/// Outcome of one particle lifetime. When `exited`, pos[exit_coord] equals the
/// endpoint selected by exit_side bit for bit and all other coordinates are
/// strictly interior; otherwise every coordinate is strictly interior.
struct Arrival {
  double dt = 0.0;
  std::vector<double> pos;
  bool exited = false;
  std::size_t exit_coord = 0;
  Side exit_side = Side::lo;
};

/// Brownian motion from x killed at min(Exp(clock_rate), exit time).
Arrival sample_arrival(std::span<const double> x, const Rectangle& rect, double clock_rate, Stream& rng,
                       const KernelAccuracy& acc = {});
/// Same, reusing `out` to avoid allocation.
void sample_arrival(std::span<const double> x, const Rectangle& rect, double clock_rate, Stream& rng,
                    const KernelAccuracy& acc, Arrival& out);

}  // namespace branchpde
