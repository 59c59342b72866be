#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "branchpde/branching.hpp"
#include "branchpde/problem.hpp"

namespace branchpde {

inline constexpr double kZ99 = 2.576;

/// Running mean and second central moment (Welford), mergeable (Chan et al.).
struct Moments {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) noexcept {
    ++n;
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
  }
  void merge(const Moments& o) noexcept;
  [[nodiscard]] double variance() const noexcept { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  [[nodiscard]] double std_error() const noexcept;
};

struct EstimatorDiagnostics {
  double mean_tree_size = 0.0;
  std::uint64_t max_tree_size = 0;
  std::uint64_t max_generations = 0;
};

struct EstimatorResult {
  double mean = 0.0;
  double std = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  double elapsed = 0.0;
  EstimatorDiagnostics diagnostics;

  [[nodiscard]] double half_width() const noexcept { return 0.5 * (ci_hi - ci_lo); }
  [[nodiscard]] bool ci_contains(double v) const noexcept { return ci_lo <= v && v <= ci_hi; }
  /// Std/Mean; undefined (NaN) when the CI contains zero.
  [[nodiscard]] double std_over_mean() const noexcept;
};

struct EstimatorOptions {
  /// Worker threads; 0 means hardware concurrency.
  unsigned threads = 0;
  /// Samples per work unit. Results depend on this (summation order), not on threads.
  std::uint64_t block_size = 4096;
};

struct NonFinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GradientUnsupported : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// u(x) = E[psi^x] from n trees; sample i uses Stream::for_sample(seed, i).
EstimatorResult estimate_value(const ProblemSpec& spec, std::span<const double> x, std::uint64_t n,
                               std::uint64_t seed, const EstimatorOptions& options = {});

/// u'(x) = E[psi^x W(x, root position)] in dimension one.
EstimatorResult estimate_gradient_1d(const ProblemSpec& spec, double x, std::uint64_t n, std::uint64_t seed,
                                     const EstimatorOptions& options = {});

/// Generic driver: mean of sample(i) for i < n, with the same blocking,
/// threading and determinism guarantees. `sample` returns (value, tree size, generations).
struct SampleOutcome {
  double value;
  std::uint64_t particles = 1;
  std::uint64_t generations = 1;
};
EstimatorResult estimate_mean(const std::function<SampleOutcome(std::uint64_t)>& sample, std::uint64_t n,
                              std::uint64_t seed, const EstimatorOptions& options = {});

}  // namespace branchpde
