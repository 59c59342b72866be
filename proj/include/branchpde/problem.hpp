#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "branchpde/interval.hpp"
#include "branchpde/rect.hpp"

namespace branchpde {

/// A real function on the closed domain. `sup_abs`, when present, returns the
/// exact sup of |f| over a rectangle; otherwise analysis falls back to a grid.
/// `d1`/`d2` are first and second derivatives of one-dimensional fields.
struct ScalarField {
  std::string name;
  std::function<double(std::span<const double>)> eval;
  std::function<double(const Rectangle&)> sup_abs;
  std::function<double(double)> d1;
  std::function<double(double)> d2;

  double operator()(std::span<const double> x) const { return eval(x); }
  double operator()(double x) const { return eval(std::span<const double>(&x, 1)); }
  [[nodiscard]] bool has_derivatives() const noexcept { return static_cast<bool>(d1) && static_cast<bool>(d2); }

  static ScalarField constant(double value);
};

/// l = (l_0, ..., l_m): l_0 factors of u, l_i factors of b_i . Du.
using MultiIndex = std::vector<int>;

inline int total(const MultiIndex& l) {
  int s = 0;
  for (int v : l) s += v;
  return s;
}

struct NonlinearityTerm {
  MultiIndex l;
  ScalarField c;
  double p = 0.0;
};

struct ParticleBudget {
  std::uint64_t max_particles = 1'000'000;
  std::uint64_t max_generations = 10'000;
};

struct InvalidProblem : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Semi-linear problem ½Δu + β(f(u, Du) - u) = 0 on rect, u = h on the boundary,
/// f(x, y, z) = Σ c_l(x) y^{l_0} Π_i (b_i(x) z)^{l_i}.
struct ProblemSpec {
  double beta = 1.0;
  Rectangle rect;
  std::vector<NonlinearityTerm> terms;
  std::vector<ScalarField> b;
  ScalarField h;
  ParticleBudget budget;
  KernelAccuracy accuracy;
  /// Known solution, used only for reporting errors.
  std::optional<ScalarField> exact;

  /// Number of gradient marks m (index length minus one).
  [[nodiscard]] std::size_t marks() const noexcept { return terms.empty() ? 0 : terms.front().l.size() - 1; }
  /// Σ |l| p_l.
  [[nodiscard]] double mean_offspring() const noexcept;
  /// Throws InvalidProblem describing the first violated invariant.
  void validate() const;
};

/// Boundary-blow-up factor of the one-dimensional gradient weight:
/// W(x, y) = k / tanh(k (x - lo)) if y > x, else k / tanh(k (x - hi)), k = sqrt(2β).
double gradient_weight_1d(double beta, const Interval& iv, double x, double y);

}  // namespace branchpde
