#include "branchpde/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "branchpde/normals.hpp"
#include "branchpde/simd/kernels.hpp"

namespace branchpde::oracles {
namespace {

double dg(const BvpNonlinearity& f, double x, double u) {
  if (f.dg_du) return f.dg_du(x, u);
  const double h = 1e-6 * std::max(1.0, std::abs(u));
  return (f.g(x, u + h) - f.g(x, u - h)) / (2.0 * h);
}

// Thomas algorithm; a = sub, b = diag, c = super, all of length n.
void solve_tridiagonal(std::vector<double> a, std::vector<double> b, std::vector<double> c, std::vector<double>& rhs) {
  const std::size_t n = b.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - c[i] * rhs[i + 1]) / b[i];
}

struct FdSolve {
  std::vector<double> x, u;
  double residual;
  int iterations;
};

FdSolve solve_fd(const BvpNonlinearity& f, double h_lo, double h_hi, const Interval& iv, std::size_t n) {
  if (n < 3) throw std::invalid_argument("solve_bvp_1d: grid needs at least 3 points");
  const double h = iv.width() / static_cast<double>(n - 1);
  const double h2 = h * h;
  FdSolve s;
  s.x.resize(n);
  s.u.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.x[i] = i + 1 == n ? iv.hi : iv.lo + h * static_cast<double>(i);
    const double w = static_cast<double>(i) / static_cast<double>(n - 1);
    s.u[i] = (1.0 - w) * h_lo + w * h_hi;
  }
  const std::size_t m = n - 2;
  auto residual_vec = [&](const std::vector<double>& u, std::vector<double>& r) {
    r.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = k + 1;
      r[k] = 0.5 * (u[i - 1] - 2.0 * u[i] + u[i + 1]) + h2 * f.g(s.x[i], u[i]);
    }
  };
  auto norm = [](const std::vector<double>& r) {
    double v = 0.0;
    for (double e : r) v = std::max(v, std::abs(e));
    return v;
  };
  std::vector<double> r, a(m), b(m), c(m), trial;
  residual_vec(s.u, r);
  double rn = norm(r);
  int it = 0;
  for (; it < 100 && rn > 1e-15; ++it) {
    for (std::size_t k = 0; k < m; ++k) {
      a[k] = 0.5;
      c[k] = 0.5;
      b[k] = -1.0 + h2 * dg(f, s.x[k + 1], s.u[k + 1]);
    }
    std::vector<double> delta(r.size());
    for (std::size_t k = 0; k < m; ++k) delta[k] = -r[k];
    solve_tridiagonal(a, b, c, delta);
    double lambda = 1.0;
    bool accepted = false;
    for (int half = 0; half < 30; ++half, lambda *= 0.5) {
      trial = s.u;
      for (std::size_t k = 0; k < m; ++k) trial[k + 1] += lambda * delta[k];
      std::vector<double> rt;
      residual_vec(trial, rt);
      const double tn = norm(rt);
      if (std::isfinite(tn) && tn < rn) {
        s.u = std::move(trial);
        r = std::move(rt);
        rn = tn;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Residual already at rounding level for this grid.
      if (rn < 1e-12) break;
      throw NewtonDiverged("solve_bvp_1d: damped Newton failed to reduce the residual");
    }
  }
  if (it == 100 && rn > 1e-12) throw NewtonDiverged("solve_bvp_1d: no convergence after 100 damped iterations");
  s.residual = rn;
  s.iterations = it;
  return s;
}

}  // namespace

BvpNonlinearity nonlinearity_of(const ProblemSpec& spec) {
  if (spec.rect.dim() != 1 || spec.marks() != 0)
    throw std::invalid_argument("nonlinearity_of: needs a one-dimensional problem without gradient terms");
  BvpNonlinearity f;
  const ProblemSpec* p = &spec;
  f.g = [p](double x, double u) {
    double sum = 0.0;
    for (const auto& t : p->terms) sum += t.c(x) * std::pow(u, t.l[0]);
    return p->beta * (sum - u);
  };
  f.dg_du = [p](double x, double u) {
    double sum = 0.0;
    for (const auto& t : p->terms)
      if (t.l[0] > 0) sum += t.c(x) * t.l[0] * std::pow(u, t.l[0] - 1);
    return p->beta * (sum - 1.0);
  };
  return f;
}

double BVPSolution::at(double x) const {
  if (x <= grid.front()) return values.front();
  if (x >= grid.back()) return values.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - grid.begin());
  const double w = (x - grid[i - 1]) / (grid[i] - grid[i - 1]);
  return (1.0 - w) * values[i - 1] + w * values[i];
}

BVPSolution solve_bvp_1d(const BvpNonlinearity& f, double h_lo, double h_hi, const Interval& iv, std::size_t grid_n) {
  iv.validate();
  const FdSolve coarse = solve_fd(f, h_lo, h_hi, iv, grid_n);
  const FdSolve fine = solve_fd(f, h_lo, h_hi, iv, 2 * grid_n - 1);
  BVPSolution out;
  out.grid = coarse.x;
  out.values.resize(grid_n);
  for (std::size_t i = 0; i < grid_n; ++i) out.values[i] = (4.0 * fine.u[2 * i] - coarse.u[i]) / 3.0;
  out.values.front() = h_lo;
  out.values.back() = h_hi;
  out.residual = fine.residual;
  out.newton_iterations = coarse.iterations + fine.iterations;
  return out;
}

BVPSolution solve_bvp_1d(const BvpNonlinearity& f, double h_lo, double h_hi, double r, std::size_t grid_n) {
  return solve_bvp_1d(f, h_lo, h_hi, Interval{-r, r}, grid_n);
}

Phi closed_phi(double x, double beta, const Interval& iv, double h_lo, double h_hi) {
  if (!iv.in_closure(x)) throw std::domain_error("closed_phi: x outside the interval");
  const double k = std::sqrt(2.0 * beta);
  const double r = iv.half_width();
  const double xc = x - iv.mid();
  const double denom = std::sinh(2.0 * k * r);
  // H(x, r) weights the upper endpoint, H(x, -r) the lower one.
  const double up = std::sinh(k * (xc + r)) / denom;
  const double down = std::sinh(k * (r - xc)) / denom;
  const double dup = k * std::cosh(k * (xc + r)) / denom;
  const double ddown = -k * std::cosh(k * (r - xc)) / denom;
  return {up * h_hi + down * h_lo, dup * h_hi + ddown * h_lo};
}

Phi closed_phi(double x, double beta, double r, double h_lo, double h_hi) {
  return closed_phi(x, beta, Interval{-r, r}, h_lo, h_hi);
}

double EmpiricalExit::cdf(double t) const {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const double total = static_cast<double>(times.size() + censored);
  return static_cast<double>(it - times.begin()) / total;
}

double EmpiricalExit::dkw_band(double alpha) const {
  const double total = static_cast<double>(times.size() + censored);
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * total));
}

EmpiricalExit euler_exit_mc(double x, const Interval& iv, double dt, std::uint64_t n, const Stream& rng,
                            std::uint64_t max_steps) {
  if (!iv.contains(x)) throw std::domain_error("euler_exit_mc: start outside the interval");
  if (!(dt > 0.0)) throw std::invalid_argument("euler_exit_mc: dt must be positive");
  EmpiricalExit out;
  out.times.reserve(n);
  const double scale = std::sqrt(dt);
  constexpr std::size_t kChunk = 256;
  for (std::uint64_t i = 0; i < n; ++i) {
    Stream path = rng.child(i);
    NormalBuffer normals(path);
    double pos = x;
    std::uint64_t steps = 0;
    bool exited = false;
    while (steps < max_steps) {
      const auto z = normals.take(kChunk);
      const std::size_t k = simd::brownian_scan(pos, z, scale, iv.lo, iv.hi);
      if (k < z.size()) {
        steps += k + 1;
        exited = true;
        break;
      }
      steps += z.size();
    }
    if (exited) {
      out.times.push_back(static_cast<double>(steps) * dt);
      if (pos >= iv.hi) ++out.exits_high;
    } else {
      ++out.censored;
    }
  }
  std::sort(out.times.begin(), out.times.end());
  return out;
}

}  // namespace branchpde::oracles
