#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace branchpde {

struct RngExhausted : std::runtime_error {
  RngExhausted() : std::runtime_error("random stream counter exhausted") {}
};

/// SplitMix64 finalizer. Used to turn (seed, index) pairs into stream keys.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Pure function of (counter, key).
namespace philox {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
inline constexpr int kRounds = 10;

constexpr Counter block(Counter c, Key k) noexcept {
  for (int round = 0; round < kRounds; ++round) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0],
         static_cast<std::uint32_t>(p1),
         static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1],
         static_cast<std::uint32_t>(p0)};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

/// Counter layout shared by the scalar stream and the batched kernels:
/// words 0-1 hold the block index, words 2-3 the stream id.
constexpr Counter make_counter(std::uint64_t stream_id, std::uint64_t block_index) noexcept {
  return {static_cast<std::uint32_t>(block_index), static_cast<std::uint32_t>(block_index >> 32),
          static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)};
}

constexpr Key make_key(std::uint64_t key) noexcept {
  return {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
}

}  // namespace philox

/// Maps 64 random bits to a double in the open interval (0, 1) using the top
/// 52 bits. The batched kernels use the identical mapping.
constexpr double bits_to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Counter-based random stream. A stream is identified by (key, id); the
/// sequence it produces depends on nothing else, so streams can be split by
/// deriving child ids without any shared state.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t key, std::uint64_t id) noexcept : key_(key), id_(id) {}

  /// Stream for Monte Carlo sample `index` of a run seeded with `seed`.
  static Stream for_sample(std::uint64_t seed, std::uint64_t index) noexcept {
    return Stream(mix64(seed), mix64(index ^ 0x5851f42d4c957f2dull));
  }

  /// Independent child stream, keyed by the parent's id and the child index.
  [[nodiscard]] Stream child(std::uint64_t index) const noexcept {
    return Stream(key_, mix64(id_ ^ mix64(index + 1)));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (buffered_ == 0) refill();
    --buffered_;
    return buffer_[buffered_];
  }

  /// Uniform on (0, 1); never returns 0 or 1.
  double uniform() { return bits_to_open_unit((*this)()); }

  double exponential(double rate);
  double normal();

  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] std::uint64_t id() const noexcept { return id_; }
  /// Number of Philox blocks consumed so far.
  [[nodiscard]] std::uint64_t blocks_used() const noexcept { return next_block_; }
  /// Claims `count` consecutive blocks for bulk generation; returns the first.
  std::uint64_t reserve_blocks(std::uint64_t count);

 private:
  void refill();

  std::uint64_t key_;
  std::uint64_t id_;
  std::uint64_t next_block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace branchpde
