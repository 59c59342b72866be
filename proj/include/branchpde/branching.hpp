#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "branchpde/problem.hpp"
#include "branchpde/rng.hpp"

namespace branchpde {

struct BudgetExceeded : std::runtime_error {
  enum class Kind { particles, generations };
  BudgetExceeded(Kind kind, std::uint64_t limit);
  Kind kind;
  std::uint64_t limit;
};

/// Index into spec.terms, drawn with probability terms[i].p.
std::size_t sample_offspring(std::span<const NonlinearityTerm> terms, Stream& rng);

/// One tree of the marked branching diffusion.
struct PsiSample {
  double psi = 1.0;
  /// Position at which the root particle stopped (exit point or first branch point).
  std::vector<double> root_pos;
  std::uint64_t particles = 0;
  std::uint64_t generations = 0;
};

/// Simulates the tree rooted at x. Particle randomness comes from
/// rng.child(label path), so the sample is a pure function of (x, spec, rng).
PsiSample simulate_psi(std::span<const double> x, const ProblemSpec& spec, const Stream& rng);

}  // namespace branchpde
