#include "branchpde/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "branchpde/detail/solve.hpp"
#include "branchpde/estimator.hpp"
#include "branchpde/registry.hpp"

namespace branchpde::analysis {
namespace {

double mean_offspring(const std::vector<NonlinearityTerm>& terms) {
  double m = 0.0;
  for (const auto& t : terms) m += total(t.l) * t.p;
  return m;
}

double exit_laplace_mc(double beta, std::span<const double> x, const Rectangle& rect, std::uint64_t n,
                       std::uint64_t seed, double& std_error) {
  const auto res = estimate_mean(
      [&](std::uint64_t i) {
        Stream rng = Stream::for_sample(seed, i);
        double eta = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < rect.dim(); ++j) eta = std::min(eta, sample_exit(x[j], rect.sides[j], rng).eta);
        return SampleOutcome{std::exp(-beta * eta)};
      },
      n, seed);
  std_error = res.std / std::sqrt(static_cast<double>(res.n));
  return res.mean;
}

// sup over interior x and both branches of |b(x)| W(x, y).
double sup_mark_factor(const ScalarField& b, double beta, const Interval& iv) {
  constexpr int kGrid = 20001;
  double best = 0.0;
  for (int i = 1; i < kGrid - 1; ++i) {
    const double x = iv.lo + iv.width() * i / (kGrid - 1);
    const double bx = std::abs(b(x));
    const double w = std::max(std::abs(gradient_weight_1d(beta, iv, x, iv.hi)),
                              std::abs(gradient_weight_1d(beta, iv, x, iv.lo)));
    best = std::max(best, bx * w);
  }
  return best;
}

}  // namespace

double first_eigenvalue(const Rectangle& rect) {
  double sum = 0.0;
  for (const auto& s : rect.sides) sum += std::numbers::pi * std::numbers::pi / (s.width() * s.width());
  return sum;
}

double extinction_margin_rectangle(double beta, const std::vector<NonlinearityTerm>& terms, const Rectangle& rect) {
  return beta * (mean_offspring(terms) - 1.0) - 0.5 * first_eigenvalue(rect);
}

double extinction_margin(double beta, const std::vector<NonlinearityTerm>& terms, const Rectangle& rect) {
  if (!rect.is_centered_cube())
    throw UnsupportedDomain("extinction_margin: the eigenvalue formula d pi^2/(4 r^2) needs a centred cube");
  return extinction_margin_rectangle(beta, terms, rect);
}

double extinction_radius(double beta, const std::vector<NonlinearityTerm>& terms, std::size_t dim) {
  const double excess = beta * (mean_offspring(terms) - 1.0);
  if (excess <= 0.0) return std::numeric_limits<double>::infinity();
  // d pi^2 / (8 r^2) = excess.
  return std::numbers::pi * std::sqrt(static_cast<double>(dim) / (8.0 * excess));
}

double exit_laplace_product(double beta, std::span<const double> x, const Rectangle& rect) {
  if (rect.dim() == 1) return exit_laplace(beta, x[0], rect.sides[0]);
  // Substituting v = exp(-beta t): E = 1 - ∫_0^1 Π_j S_j(-ln(v)/beta) dv.
  auto survival = [&](double v) {
    if (v <= 0.0) return 0.0;
    if (v >= 1.0) return 1.0;
    const double t = -std::log(v) / beta;
    double prod = 1.0;
    for (std::size_t j = 0; j < rect.dim(); ++j) prod *= exit_time_survival(t, x[j], rect.sides[j]);
    return prod;
  };
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(survival, 0.0, 1.0, 15, 1e-13);
  return 1.0 - integral;
}

DeltaEstimate compute_delta(double beta, const Rectangle& rect, const DeltaOptions& options) {
  if (!(beta > 0.0)) throw std::invalid_argument("compute_delta: beta must be positive");
  rect.validate();
  const auto centre = rect.center();
  DeltaEstimate out;
  out.method = options.method;
  if (options.method == DeltaMethod::monte_carlo) {
    double se = 0.0;
    const double laplace = exit_laplace_mc(beta, centre, rect, options.mc_samples, options.seed, se);
    out.std_error = se;
    out.delta = std::clamp(1.0 - laplace + (options.conservative ? kZ99 * se : 0.0), 0.0, 1.0);
    return out;
  }
  out.delta = std::clamp(1.0 - exit_laplace_product(beta, centre, rect), 0.0, 1.0);
  return out;
}

Gamma gamma_threshold(const std::vector<NonlinearityTerm>& terms, double delta) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("gamma_threshold: delta must lie in [0, 1]");
  int degree = 0;
  for (const auto& t : terms) degree = std::max(degree, total(t.l));
  // Coefficients of the dominating generating function f̃.
  std::vector<double> pt(static_cast<std::size_t>(degree) + 1, 0.0);
  pt[0] = 1.0 - delta;
  for (const auto& t : terms) pt[static_cast<std::size_t>(total(t.l))] += delta * t.p;
  double mean = 0.0;
  for (int k = 1; k <= degree; ++k) mean += k * pt[static_cast<std::size_t>(k)];
  if (mean >= 1.0)
    throw Supercritical("dominating offspring mean " + std::to_string(mean) + " >= 1; no integrability threshold");
  const double inf = std::numeric_limits<double>::infinity();
  bool has_superlinear = false;
  for (int k = 2; k <= degree; ++k) has_superlinear |= pt[static_cast<std::size_t>(k)] > 0.0;
  if (!has_superlinear) return {inf, inf};

  auto f_tilde = [&](double s) {
    double v = 0.0;
    for (int k = degree; k >= 0; --k) v = v * s + pt[static_cast<std::size_t>(k)];
    return v;
  };
  // g(s) = s f̃'(s) - f̃(s) = Σ (k-1) p̃_k s^k, increasing on (0, inf), g(1) < 0.
  auto g = [&](double s) {
    double value = 0.0, deriv = 0.0;
    for (int k = degree; k >= 0; --k) {
      deriv = deriv * s + value;
      value = value * s + (k - 1) * pt[static_cast<std::size_t>(k)];
    }
    return detail::Eval{value, deriv};
  };
  const double s_star = detail::solve_increasing_positive(g, 2.0, 1e-15);
  return {s_star / f_tilde(s_star), s_star};
}

double compute_c0(const ProblemSpec& spec) {
  double c0 = sup_abs(spec.h, spec.rect);
  for (const auto& t : spec.terms) c0 = std::max(c0, sup_abs(t.c, spec.rect) / t.p);
  if (spec.marks() == 0) return c0;
  if (spec.rect.dim() != 1) throw UnsupportedDomain("compute_c0: gradient marks are one-dimensional");
  double c1 = 1.0;
  for (const auto& b : spec.b) c1 = std::max(c1, sup_mark_factor(b, spec.beta, spec.rect.sides[0]));
  return c0 * c1;
}

std::string_view to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::certified: return "certified";
    case Regime::extinction_only: return "extinction-only";
    case Regime::uncertified: return "uncertified";
  }
  return "?";
}

ThresholdReport analyze(const ProblemSpec& spec, int q, const DeltaOptions& options) {
  if (q < 1) throw std::invalid_argument("analyze: moment order q must be >= 1");
  spec.validate();
  ThresholdReport rep;
  rep.q = q;
  rep.lambda1 = first_eigenvalue(spec.rect);
  rep.lambda1_cube_formula = spec.rect.is_centered_cube();
  rep.extinction_margin = extinction_margin_rectangle(spec.beta, spec.terms, spec.rect);
  const auto delta = compute_delta(spec.beta, spec.rect, options);
  rep.delta = delta.delta;
  rep.delta_std_error = delta.std_error;
  rep.c0 = compute_c0(spec);
  try {
    const auto g = gamma_threshold(spec.terms, rep.delta);
    rep.gamma = g.gamma;
    rep.s_star = g.s_star;
    rep.admissible = std::pow(rep.c0, q) <= rep.gamma;
  } catch (const Supercritical&) {
    rep.supercritical = true;
    rep.gamma = std::numeric_limits<double>::quiet_NaN();
    rep.s_star = std::numeric_limits<double>::quiet_NaN();
  }
  if (rep.admissible) rep.regime = Regime::certified;
  else if (rep.extinction_margin <= 0.0) rep.regime = Regime::extinction_only;
  else rep.regime = Regime::uncertified;
  return rep;
}

bool admissible(const ProblemSpec& spec, int q, const DeltaOptions& options) {
  const double delta = compute_delta(spec.beta, spec.rect, options).delta;
  try {
    return std::pow(compute_c0(spec), q) <= gamma_threshold(spec.terms, delta).gamma;
  } catch (const Supercritical&) {
    return false;
  }
}

double largest_radius(const std::function<bool(double)>& pred, double lo, double hi, double tol) {
  if (!(lo < hi) || !(tol > 0.0)) throw std::invalid_argument("largest_radius: need lo < hi and tol > 0");
  if (!pred(lo)) throw NeverAdmissible("condition fails already at r = " + std::to_string(lo));
  if (pred(hi)) throw AlwaysAdmissible("condition still holds at r = " + std::to_string(hi));
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (pred(mid) ? lo : hi) = mid;
  }
  return lo;
}

double admissible_radius(const Family& family, int q, double lo, double hi, double tol, const DeltaOptions& options) {
  return largest_radius([&](double r) { return admissible(family(r), q, options); }, lo, hi, tol);
}

SupersolutionCheck supersolution_residual(const ScalarField& v, const ProblemSpec& spec, int q, std::size_t grid_n) {
  if (spec.rect.dim() != 1) throw UnsupportedDomain("supersolution_residual: one-dimensional problems only");
  if (spec.marks() != 0) throw std::invalid_argument("supersolution_residual: value problems only");
  if (!v.d2) throw std::invalid_argument("supersolution_residual: v must provide a second derivative");
  if (grid_n < 3) throw std::invalid_argument("supersolution_residual: grid_n must be >= 3");
  const Interval& iv = spec.rect.sides[0];
  SupersolutionCheck out{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (std::size_t i = 1; i + 1 < grid_n; ++i) {
    const double x = iv.lo + iv.width() * static_cast<double>(i) / static_cast<double>(grid_n - 1);
    const double vx = v(x);
    double source = 0.0;
    for (const auto& t : spec.terms)
      source += std::pow(std::abs(t.c(x)), q) / std::pow(t.p, q - 1) * std::pow(vx, total(t.l));
    out.max_interior_residual = std::max(out.max_interior_residual, 0.5 * v.d2(x) + spec.beta * (source - vx));
  }
  for (double x : {iv.lo, iv.hi})
    out.min_boundary_slack = std::min(out.min_boundary_slack, v(x) - std::pow(std::abs(spec.h(x)), q));
  return out;
}

}  // namespace branchpde::analysis
