#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "branchpde/simd/kernels.hpp"

namespace branchpde::simd {
namespace {

constexpr int kUnset = -1;
std::atomic<int> g_active{kUnset};

Isa initial_isa() {
  const char* env = std::getenv("BRANCHPDE_ISA");
  if (env == nullptr || *env == '\0') return detect_isa();
  const std::string name(env);
  if (name == "scalar") return Isa::scalar;
  if (name == "avx2") {
    if (!isa_supported(Isa::avx2)) throw std::invalid_argument("BRANCHPDE_ISA=avx2 but the CPU lacks AVX2/FMA");
    return Isa::avx2;
  }
  throw std::invalid_argument("BRANCHPDE_ISA must be 'scalar' or 'avx2', got '" + name + "'");
}

}  // namespace

std::string_view to_string(Isa isa) noexcept { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) noexcept {
  if (isa == Isa::scalar) return true;
#if BRANCHPDE_HAVE_AVX2 && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect_isa() noexcept { return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar; }

Isa active_isa() {
  int current = g_active.load(std::memory_order_acquire);
  if (current == kUnset) {
    const int chosen = static_cast<int>(initial_isa());
    g_active.compare_exchange_strong(current, chosen, std::memory_order_acq_rel);
    return static_cast<Isa>(g_active.load(std::memory_order_acquire));
  }
  return static_cast<Isa>(current);
}

void set_isa(Isa isa) {
  if (!isa_supported(isa)) throw std::invalid_argument("requested ISA is not supported by this CPU");
  g_active.store(static_cast<int>(isa), std::memory_order_release);
}

void philox_uniforms(std::uint64_t key, std::uint64_t stream_id, std::uint64_t first_block,
                     std::span<double> out) {
  if (active_isa() == Isa::avx2) return avx2::philox_uniforms(key, stream_id, first_block, out);
  scalar::philox_uniforms(key, stream_id, first_block, out);
}

void box_muller(std::span<double> data) {
  if (active_isa() == Isa::avx2) return avx2::box_muller(data);
  scalar::box_muller(data);
}

std::size_t brownian_scan(double& x, std::span<const double> z, double scale, double lo, double hi) {
  if (active_isa() == Isa::avx2) return avx2::brownian_scan(x, z, scale, lo, hi);
  return scalar::brownian_scan(x, z, scale, lo, hi);
}

}  // namespace branchpde::simd
