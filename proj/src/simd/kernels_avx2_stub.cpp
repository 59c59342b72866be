// Non-x86 builds: the AVX2 entry points forward to the scalar kernels and are
// never selected by the dispatcher.

#include "branchpde/simd/kernels.hpp"

namespace branchpde::simd::avx2 {

void philox_uniforms(std::uint64_t key, std::uint64_t stream_id, std::uint64_t first_block,
                     std::span<double> out) {
  scalar::philox_uniforms(key, stream_id, first_block, out);
}

void box_muller(std::span<double> data) { scalar::box_muller(data); }

std::size_t brownian_scan(double& x, std::span<const double> z, double scale, double lo, double hi) {
  return scalar::brownian_scan(x, z, scale, lo, hi);
}

}  // namespace branchpde::simd::avx2
