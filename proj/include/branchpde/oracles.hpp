#pragma once

// Independent reference computations used to validate the Monte Carlo modules.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "branchpde/interval.hpp"
#include "branchpde/problem.hpp"
#include "branchpde/rng.hpp"

namespace branchpde::oracles {

/// Nonlinear part of ½u'' + g(x, u) = 0. dg_du may be empty (finite differences).
struct BvpNonlinearity {
  std::function<double(double, double)> g;
  std::function<double(double, double)> dg_du;
};

/// g(x, u) = β(Σ c_l(x) u^{l_0} - u) for a one-dimensional problem without gradient terms.
BvpNonlinearity nonlinearity_of(const ProblemSpec& spec);

struct BVPSolution {
  std::vector<double> grid;
  std::vector<double> values;
  /// Max residual of the discrete equations ½(u[i-1] - 2u[i] + u[i+1]) + h² g(x[i], u[i])
  /// on the finer grid.
  double residual = 0.0;
  int newton_iterations = 0;

  /// Linear interpolation on the grid.
  [[nodiscard]] double at(double x) const;
};

struct NewtonDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Second-order finite differences on grid_n uniform points of [lo, hi],
/// damped Newton from the linear interpolant, then Richardson extrapolation
/// against the solve on 2 grid_n - 1 points.
BVPSolution solve_bvp_1d(const BvpNonlinearity& f, double h_lo, double h_hi, const Interval& iv,
                         std::size_t grid_n = 4001);

/// Symmetric-interval form: domain (-r, r).
BVPSolution solve_bvp_1d(const BvpNonlinearity& f, double h_lo, double h_hi, double r, std::size_t grid_n = 4001);

/// phi(x) = E[exp(-β eta) h(W_eta)] and its derivative, for boundary values
/// h_lo at iv.lo and h_hi at iv.hi.
struct Phi {
  double phi;
  double dphi;
};
Phi closed_phi(double x, double beta, const Interval& iv, double h_lo, double h_hi);
Phi closed_phi(double x, double beta, double r, double h_lo, double h_hi);

/// Euler paths with first-grid-point exit detection.
struct EmpiricalExit {
  std::vector<double> times;   // sorted
  std::uint64_t exits_high = 0;
  std::uint64_t censored = 0;  // paths still inside at max_steps

  [[nodiscard]] double cdf(double t) const;
  /// Dvoretzky-Kiefer-Wolfowitz half-width at confidence 1 - alpha.
  [[nodiscard]] double dkw_band(double alpha) const;
};

EmpiricalExit euler_exit_mc(double x, const Interval& iv, double dt, std::uint64_t n, const Stream& rng,
                            std::uint64_t max_steps = 100'000'000);

}  // namespace branchpde::oracles
