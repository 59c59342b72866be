#include "branchpde/rng.hpp"

#include <cmath>
#include <numbers>

namespace branchpde {

void Stream::refill() {
  if (next_block_ == std::numeric_limits<std::uint64_t>::max()) throw RngExhausted();
  const auto out = philox::block(philox::make_counter(id_, next_block_++), philox::make_key(key_));
  // Consumed back to front by operator().
  buffer_[1] = (std::uint64_t{out[1]} << 32) | out[0];
  buffer_[0] = (std::uint64_t{out[3]} << 32) | out[2];
  buffered_ = 2;
}

std::uint64_t Stream::reserve_blocks(std::uint64_t count) {
  if (count > std::numeric_limits<std::uint64_t>::max() - next_block_) throw RngExhausted();
  const std::uint64_t first = next_block_;
  next_block_ += count;
  buffered_ = 0;
  return first;
}

double Stream::exponential(double rate) { return -std::log(uniform()) / rate; }

double Stream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace branchpde
