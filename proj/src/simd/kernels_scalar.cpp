#include <cmath>
#include <numbers>
#include <stdexcept>

#include "branchpde/rng.hpp"
#include "branchpde/simd/kernels.hpp"

namespace branchpde::simd::scalar {

void philox_uniforms(std::uint64_t key, std::uint64_t stream_id, std::uint64_t first_block,
                     std::span<double> out) {
  if (out.size() % 2 != 0) throw std::invalid_argument("philox_uniforms: odd output size");
  const auto k = philox::make_key(key);
  for (std::size_t i = 0; i < out.size() / 2; ++i) {
    const auto c = philox::block(philox::make_counter(stream_id, first_block + i), k);
    out[2 * i] = bits_to_open_unit((std::uint64_t{c[1]} << 32) | c[0]);
    out[2 * i + 1] = bits_to_open_unit((std::uint64_t{c[3]} << 32) | c[2]);
  }
}

void box_muller(std::span<double> data) {
  if (data.size() % 2 != 0) throw std::invalid_argument("box_muller: odd size");
  for (std::size_t i = 0; i < data.size(); i += 2) {
    const double radius = std::sqrt(-2.0 * std::log(data[i]));
    const double angle = 2.0 * std::numbers::pi * data[i + 1];
    data[i] = radius * std::cos(angle);
    data[i + 1] = radius * std::sin(angle);
  }
}

std::size_t brownian_scan(double& x, std::span<const double> z, double scale, double lo, double hi) {
  for (std::size_t i = 0; i < z.size(); ++i) {
    x += scale * z[i];
    if (x <= lo || x >= hi) return i;
  }
  return z.size();
}

}  // namespace branchpde::simd::scalar
