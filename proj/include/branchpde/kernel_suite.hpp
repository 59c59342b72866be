#pragma once

// Statistical self-check of the exit-law kernels, run by `branchpde kernel-test`
// and by the acceptance binary. Fixed seeds make every verdict reproducible.

#include <cstdint>
#include <string>
#include <vector>

namespace branchpde {

struct KernelCheck {
  std::string name;
  bool passed = false;
  /// Observed discrepancy and the bound it must stay under.
  double statistic = 0.0;
  double bound = 0.0;
};

struct KernelSuiteOptions {
  std::uint64_t seed = 0x6b65726e656cull;
  std::uint64_t samples = 400000;
};

/// Dual-series agreement below 1e-10, Monte Carlo exit Laplace transforms and
/// side frequencies within 3 sigma, and d = 2 product survival within 3 sigma.
std::vector<KernelCheck> run_kernel_suite(const KernelSuiteOptions& options = {});

}  // namespace branchpde
