#include "branchpde/problem.hpp"

#include <cmath>
#include <string>

namespace branchpde {

ScalarField ScalarField::constant(double value) {
  ScalarField f;
  f.name = std::to_string(value);
  f.eval = [value](std::span<const double>) { return value; };
  f.sup_abs = [value](const Rectangle&) { return std::abs(value); };
  f.d1 = [](double) { return 0.0; };
  f.d2 = [](double) { return 0.0; };
  return f;
}

double ProblemSpec::mean_offspring() const noexcept {
  double m = 0.0;
  for (const auto& t : terms) m += total(t.l) * t.p;
  return m;
}

void ProblemSpec::validate() const {
  if (!(beta > 0.0 && std::isfinite(beta))) throw InvalidProblem("beta must be positive and finite");
  try {
    rect.validate();
  } catch (const std::invalid_argument& e) {
    throw InvalidProblem(std::string("domain: ") + e.what());
  }
  accuracy.validate();
  if (terms.empty()) throw InvalidProblem("at least one nonlinearity term is required");
  const std::size_t width = terms.front().l.size();
  if (width == 0) throw InvalidProblem("multi-index must have at least one entry");
  double psum = 0.0;
  for (const auto& t : terms) {
    if (t.l.size() != width) throw InvalidProblem("all multi-indices must have the same length");
    for (int v : t.l)
      if (v < 0) throw InvalidProblem("multi-index entries must be nonnegative");
    if (!(t.p > 0.0)) throw InvalidProblem("branching probabilities must be positive");
    if (!t.c.eval) throw InvalidProblem("nonlinearity coefficient missing");
    psum += t.p;
  }
  if (std::abs(psum - 1.0) > 1e-12) throw InvalidProblem("branching probabilities must sum to 1, got " + std::to_string(psum));
  if (!h.eval) throw InvalidProblem("boundary function missing");
  const std::size_t m = width - 1;
  if (b.size() != m) throw InvalidProblem("expected " + std::to_string(m) + " gradient direction fields, got " + std::to_string(b.size()));
  if (m > 0) {
    if (rect.dim() != 1) throw InvalidProblem("gradient terms are supported only in dimension 1");
    // sup |b|/dist must stay bounded: compare the ratio close to each endpoint
    // against its value at moderate distance.
    const Interval& iv = rect.sides.front();
    for (const auto& bi : b) {
      if (!bi.eval) throw InvalidProblem("gradient direction field missing");
      for (double sign : {1.0, -1.0}) {
        const double edge = sign > 0 ? iv.lo : iv.hi;
        auto ratio = [&](double dist) { return std::abs(bi(edge + sign * dist * iv.width())) / (dist * iv.width()); };
        const double near = ratio(1e-7);
        const double far = std::max({ratio(1e-2), ratio(1e-3), 1.0 / iv.width()});
        if (!(near <= 100.0 * far))
          throw InvalidProblem("gradient direction field '" + bi.name + "' does not vanish at the boundary");
      }
    }
  }
}

double gradient_weight_1d(double beta, const Interval& iv, double x, double y) {
  const double k = std::sqrt(2.0 * beta);
  return y > x ? k / std::tanh(k * (x - iv.lo)) : k / std::tanh(k * (x - iv.hi));
}

}  // namespace branchpde
