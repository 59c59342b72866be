#pragma once

// Batched inner loops with a scalar reference implementation and an AVX2
// variant. The public entry points dispatch at runtime on the active ISA;
// the per-ISA namespaces are exposed so tests can compare them directly.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace branchpde::simd {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa) noexcept;
bool isa_supported(Isa isa) noexcept;
/// Best ISA supported by the running CPU.
Isa detect_isa() noexcept;
/// ISA currently used by the dispatching entry points. Honors the
/// BRANCHPDE_ISA environment variable ("scalar" or "avx2") on first use.
Isa active_isa();
/// Forces an ISA; throws std::invalid_argument if the CPU lacks it.
void set_isa(Isa isa);

/// out[2i] and out[2i+1] receive the two uniforms (0,1) of Philox block
/// `first_block + i` of stream (key, stream_id), in the order a fresh
/// branchpde::Stream would return them. out.size() must be even.
void philox_uniforms(std::uint64_t key, std::uint64_t stream_id, std::uint64_t first_block,
                     std::span<double> out);

/// In-place Box-Muller: each pair (u1, u2) becomes (r cos 2πu2, r sin 2πu2)
/// with r = sqrt(-2 ln u1). data.size() must be even.
void box_muller(std::span<double> data);

/// Advances a Brownian path x <- x + scale * z[i] and stops at the first i
/// whose updated position lies outside (lo, hi). Returns that index, or
/// z.size() if the path never leaves; x holds the last computed position.
std::size_t brownian_scan(double& x, std::span<const double> z, double scale, double lo, double hi);

namespace scalar {
void philox_uniforms(std::uint64_t key, std::uint64_t stream_id, std::uint64_t first_block,
                     std::span<double> out);
void box_muller(std::span<double> data);
std::size_t brownian_scan(double& x, std::span<const double> z, double scale, double lo, double hi);
}  // namespace scalar

namespace avx2 {
void philox_uniforms(std::uint64_t key, std::uint64_t stream_id, std::uint64_t first_block,
                     std::span<double> out);
void box_muller(std::span<double> data);
std::size_t brownian_scan(double& x, std::span<const double> z, double scale, double lo, double hi);
}  // namespace avx2

}  // namespace branchpde::simd
