#include "branchpde/scenarios.hpp"

#include <string>

#include "branchpde/registry.hpp"

namespace branchpde::scenarios {
namespace {

ScalarField field(const std::string& ref, const Rectangle& rect, double beta) {
  return Registry::global().make(ref, FieldContext{rect, beta});
}

}  // namespace

ProblemSpec cubic_sech(double r) {
  ProblemSpec s;
  s.beta = 1.0;
  s.rect = Rectangle::cube(1, r);
  s.terms = {{{1}, ScalarField::constant(0.5), 0.5}, {{3}, ScalarField::constant(0.5), 0.5}};
  s.h = field("cosh_sech", s.rect, s.beta);
  s.exact = s.h;
  return s;
}

ProblemSpec quadratic_tan(double r) {
  ProblemSpec s;
  s.beta = 1.0;
  s.rect = Rectangle::cube(1, r);
  s.terms = {{{0}, ScalarField::constant(0.5), 0.25}, {{2}, ScalarField::constant(-1.5), 0.75}};
  s.h = field("one_plus_2tan2", s.rect, s.beta);
  s.exact = s.h;
  return s;
}

ProblemSpec cubic_tan_sum(std::size_t d, double r) {
  ProblemSpec s;
  s.beta = static_cast<double>(d);
  s.rect = Rectangle::cube(d, r);
  s.terms = {{{3}, ScalarField::constant(-1.0), 1.0}};
  s.h = field("tan_sum", s.rect, s.beta);
  s.exact = s.h;
  return s;
}

ProblemSpec linear(double beta, double r, const char* h) {
  ProblemSpec s;
  s.beta = beta;
  s.rect = Rectangle::cube(1, r);
  s.terms = {{{0}, ScalarField::constant(0.0), 1.0}};
  s.h = field(h, s.rect, s.beta);
  return s;
}

ProblemSpec gradient_demo(double beta, double r, double c1, double kappa) {
  ProblemSpec s;
  s.beta = beta;
  s.rect = Rectangle::cube(1, r);
  const std::string params = std::to_string(c1) + "," + std::to_string(kappa);
  s.terms = {{{0, 0}, field("gdemo_source:" + params, s.rect, beta), 0.4},
             {{1, 0}, ScalarField::constant(c1), 0.3},
             {{0, 1}, ScalarField::constant(kappa), 0.3}};
  s.b = {field("vanish_quadratic", s.rect, beta)};
  s.h = field("cos", s.rect, beta);
  s.exact = s.h;
  return s;
}

}  // namespace branchpde::scenarios
