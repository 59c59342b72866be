#pragma once

// Problem families used by the table command and the test suites.

#include <cstddef>

#include "branchpde/problem.hpp"

namespace branchpde::scenarios {

/// ½u'' + ½u³ + ½u - u = 0 on (-r, r), h = sqrt(2)/cosh; β = 1, p_1 = p_3 = ½.
ProblemSpec cubic_sech(double r);

/// ½u'' + ½ - (3/2)u² - u = 0 on (-r, r), h = 1 + 2 tan²; β = 1, p_0 = 0.25, p_2 = 0.75.
ProblemSpec quadratic_tan(double r);

/// ½Δu - d(u³ + u) = 0 on (-r, r)^d, h = tan(Σx); β = d, single term l = 3 with c = -1.
ProblemSpec cubic_tan_sum(std::size_t d, double r);

/// Linear problem ½u'' - βu = 0 on (-r, r) with boundary data h (registry reference).
ProblemSpec linear(double beta, double r, const char* h);

/// ½u'' + β(c0 + c1 u + κ b u' - u) = 0 on (-r, r) with b = (x + r)(r - x), exact solution cos x.
ProblemSpec gradient_demo(double beta, double r, double c1 = 0.25, double kappa = 0.5);

}  // namespace branchpde::scenarios
