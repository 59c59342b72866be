#include "branchpde/normals.hpp"

#include <stdexcept>

#include "branchpde/simd/kernels.hpp"

namespace branchpde {

void NormalBuffer::refill() {
  const std::uint64_t first = rng_->reserve_blocks(kBatch / 2);
  simd::philox_uniforms(rng_->key(), rng_->id(), first, data_);
  simd::box_muller(data_);
  pos_ = 0;
}

std::span<const double> NormalBuffer::take(std::size_t count) {
  if (count > kBatch) throw std::invalid_argument("NormalBuffer::take: request larger than a batch");
  if (kBatch - pos_ < count) refill();
  const std::span<const double> out(data_.data() + pos_, count);
  pos_ += count;
  return out;
}

}  // namespace branchpde
