#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "branchpde/rng.hpp"

namespace branchpde {

/// Standard normals drawn in batches through the dispatched SIMD kernels.
/// Consumes whole Philox blocks of the wrapped stream via reserve_blocks.
class NormalBuffer {
 public:
  static constexpr std::size_t kBatch = 512;

  explicit NormalBuffer(Stream& rng) noexcept : rng_(&rng) {}

  double next() {
    if (pos_ == kBatch) refill();
    return data_[pos_++];
  }

  /// Span of `count` <= kBatch fresh normals, valid until the next call.
  std::span<const double> take(std::size_t count);

 private:
  void refill();

  Stream* rng_;
  std::array<double, kBatch> data_{};
  std::size_t pos_ = kBatch;
};

}  // namespace branchpde
