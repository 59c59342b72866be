#pragma once

// Validity certification for the branching representation: almost-sure
// extinction, the dominating Galton-Watson threshold gamma, sup-norm constants
// and supersolution checks.

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "branchpde/problem.hpp"

namespace branchpde::analysis {

struct UnsupportedDomain : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
/// The dominating offspring law has mean >= 1.
struct Supercritical : std::domain_error {
  using std::domain_error::domain_error;
};
struct NeverAdmissible : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AlwaysAdmissible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// First Dirichlet eigenvalue of -Δ on the rectangle: Σ_j π²/w_j².
double first_eigenvalue(const Rectangle& rect);

/// β(Σ|l|p_l - 1) - λ₁/2 on a centred cube; <= 0 certifies extinction.
/// Throws UnsupportedDomain for any other rectangle (use extinction_margin_rectangle).
double extinction_margin(double beta, const std::vector<NonlinearityTerm>& terms, const Rectangle& rect);
/// Same expression with the product eigenvalue of a general rectangle.
double extinction_margin_rectangle(double beta, const std::vector<NonlinearityTerm>& terms, const Rectangle& rect);
/// Half-width of the largest cube (-r, r)^d with non-positive margin; +inf when Σ|l|p_l <= 1.
double extinction_radius(double beta, const std::vector<NonlinearityTerm>& terms, std::size_t dim);

enum class DeltaMethod {
  /// Closed form in d = 1, quadrature of the product survival otherwise.
  automatic,
  quadrature,
  monte_carlo,
};

struct DeltaOptions {
  DeltaMethod method = DeltaMethod::automatic;
  std::uint64_t mc_samples = 1'000'000;
  std::uint64_t seed = 0;
  /// For Monte Carlo: report δ + z·se so that the derived γ is a lower bound.
  bool conservative = true;
};

struct DeltaEstimate {
  double delta = 0.0;
  /// Zero for deterministic methods.
  double std_error = 0.0;
  DeltaMethod method = DeltaMethod::automatic;
};

/// δ = 1 - inf_x E[exp(-β η^x)]. Coordinate survivals are each maximal at the
/// side midpoint for every t, so the infimum sits at the centre of any rectangle.
DeltaEstimate compute_delta(double beta, const Rectangle& rect, const DeltaOptions& options = {});

/// E[exp(-β η^x)] = 1 - β ∫ exp(-βt) Π_j S_j(t, x_j) dt.
double exit_laplace_product(double beta, std::span<const double> x, const Rectangle& rect);

struct Gamma {
  double gamma;
  double s_star;
};

/// Dominating law p̃_0 = 1 - δ + δ p_0, p̃_l = δ p_l, f̃ its generating function.
/// Returns γ = s*/f̃(s*) where s* solves s f̃'(s) = f̃(s); γ = s* = +inf when no
/// term has |l| >= 2. Throws Supercritical when Σ|l|p̃_l >= 1.
Gamma gamma_threshold(const std::vector<NonlinearityTerm>& terms, double delta);

/// C₀ = max(sup|h|, max_l sup|c_l|/p_l). With gradient marks the per-particle
/// factor also carries b_i(x)W(x, y), so the result is C₀·max(1, sup|b_i W|).
double compute_c0(const ProblemSpec& spec);

enum class Regime {
  /// C₀^q <= γ: L^q bounded representation.
  certified,
  /// Extinction holds but integrability is not certified; the tree is finite
  /// yet may represent a different solution or have unbounded moments.
  extinction_only,
  /// Neither extinction nor integrability is certified.
  uncertified,
};
std::string_view to_string(Regime regime) noexcept;

struct ThresholdReport {
  double lambda1 = 0.0;
  /// False when λ₁ comes from the general product formula on a non-cubic rectangle.
  bool lambda1_cube_formula = true;
  double extinction_margin = 0.0;
  double delta = 0.0;
  double delta_std_error = 0.0;
  /// +inf when the dominating law is supercritical (no certificate).
  double gamma = 0.0;
  double s_star = 0.0;
  bool supercritical = false;
  double c0 = 0.0;
  int q = 1;
  bool admissible = false;
  Regime regime = Regime::uncertified;
};

ThresholdReport analyze(const ProblemSpec& spec, int q, const DeltaOptions& options = {});

/// C₀(r)^q <= γ(r) for the family member of half-width r.
bool admissible(const ProblemSpec& spec, int q, const DeltaOptions& options = {});

using Family = std::function<ProblemSpec(double r)>;

/// Largest r in [lo, hi] with pred(r) true, assuming pred true then false.
/// Throws NeverAdmissible if pred(lo) is false, AlwaysAdmissible if pred(hi) is true.
double largest_radius(const std::function<bool(double)>& pred, double lo, double hi, double tol);

/// Largest admissible half-width of a family, to within tol.
double admissible_radius(const Family& family, int q, double lo, double hi, double tol = 1e-5,
                         const DeltaOptions& options = {});

struct SupersolutionCheck {
  /// max over interior grid points of ½v'' + β(Σ|c_l|^q/p_l^{q-1} v^{|l|} - v); must be <= 0.
  double max_interior_residual;
  /// min over the two boundary points of v - |h|^q; must be >= 0.
  double min_boundary_slack;
  /// `tol` absorbs rounding where the inequality binds.
  [[nodiscard]] bool holds(double tol = 1e-12) const noexcept {
    return max_interior_residual <= tol && min_boundary_slack >= -tol;
  }
};

/// One-dimensional value problems only; v must carry d2.
SupersolutionCheck supersolution_residual(const ScalarField& v, const ProblemSpec& spec, int q,
                                          std::size_t grid_n = 2001);

}  // namespace branchpde::analysis
