#include "branchpde/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace branchpde {

void Moments::merge(const Moments& o) noexcept {
  if (o.n == 0) return;
  if (n == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
  const double total = na + nb;
  const double delta = o.mean - mean;
  mean += delta * nb / total;
  m2 += o.m2 + delta * delta * na * nb / total;
  n += o.n;
}

double Moments::std_error() const noexcept { return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }

double EstimatorResult::std_over_mean() const noexcept {
  if (ci_lo <= 0.0 && ci_hi >= 0.0) return std::nan("");
  return std / std::abs(mean);
}

namespace {

struct Block {
  Moments moments;
  std::uint64_t particles = 0;
  std::uint64_t max_particles = 0;
  std::uint64_t max_generations = 0;
};

}  // namespace

EstimatorResult estimate_mean(const std::function<SampleOutcome(std::uint64_t)>& sample, std::uint64_t n,
                              std::uint64_t seed, const EstimatorOptions& options) {
  if (n < 2) throw std::invalid_argument("estimator needs at least two samples");
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t block_size = std::max<std::uint64_t>(1, options.block_size);
  const std::uint64_t blocks = (n + block_size - 1) / block_size;
  std::vector<Block> results(blocks);
  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, blocks));

  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    try {
      for (std::uint64_t b = next++; b < blocks && !failed.load(std::memory_order_relaxed); b = next++) {
        Block& blk = results[b];
        const std::uint64_t end = std::min(n, (b + 1) * block_size);
        for (std::uint64_t i = b * block_size; i < end; ++i) {
          const SampleOutcome s = sample(i);
          if (!std::isfinite(s.value)) throw NonFinite("non-finite sample at index " + std::to_string(i));
          blk.moments.add(s.value);
          blk.particles += s.particles;
          blk.max_particles = std::max(blk.max_particles, s.particles);
          blk.max_generations = std::max(blk.max_generations, s.generations);
        }
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      failed = true;
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  Moments total;
  EstimatorResult r;
  std::uint64_t particles = 0;
  for (const Block& blk : results) {
    total.merge(blk.moments);
    particles += blk.particles;
    r.diagnostics.max_tree_size = std::max(r.diagnostics.max_tree_size, blk.max_particles);
    r.diagnostics.max_generations = std::max(r.diagnostics.max_generations, blk.max_generations);
  }
  r.mean = total.mean;
  r.std = std::sqrt(total.variance());
  const double half = kZ99 * r.std / std::sqrt(static_cast<double>(total.n));
  r.ci_lo = r.mean - half;
  r.ci_hi = r.mean + half;
  r.n = total.n;
  r.seed = seed;
  r.diagnostics.mean_tree_size = static_cast<double>(particles) / static_cast<double>(total.n);
  r.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

EstimatorResult estimate_value(const ProblemSpec& spec, std::span<const double> x, std::uint64_t n,
                               std::uint64_t seed, const EstimatorOptions& options) {
  spec.validate();
  if (!spec.rect.contains(x)) throw std::invalid_argument("evaluation point must lie strictly inside the domain");
  const std::vector<double> point(x.begin(), x.end());
  return estimate_mean(
      [&](std::uint64_t i) {
        const PsiSample s = simulate_psi(point, spec, Stream::for_sample(seed, i));
        return SampleOutcome{s.psi, s.particles, s.generations};
      },
      n, seed, options);
}

EstimatorResult estimate_gradient_1d(const ProblemSpec& spec, double x, std::uint64_t n, std::uint64_t seed,
                                     const EstimatorOptions& options) {
  if (spec.rect.dim() != 1) throw GradientUnsupported("gradient estimation is implemented for d = 1 only");
  spec.validate();
  if (!spec.rect.sides[0].contains(x)) throw std::invalid_argument("evaluation point must lie strictly inside the domain");
  const Interval iv = spec.rect.sides[0];
  const double point[1] = {x};
  return estimate_mean(
      [&](std::uint64_t i) {
        const PsiSample s = simulate_psi(point, spec, Stream::for_sample(seed, i));
        return SampleOutcome{s.psi * gradient_weight_1d(spec.beta, iv, x, s.root_pos[0]), s.particles, s.generations};
      },
      n, seed, options);
}

}  // namespace branchpde
