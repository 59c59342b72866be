// Compiled with -mavx2 -mfma. Only reached through the dispatcher after a
// CPU feature check.

#include <immintrin.h>

#include <bit>
#include <stdexcept>

#include "branchpde/rng.hpp"
#include "branchpde/simd/kernels.hpp"

namespace branchpde::simd::avx2 {
namespace {

// Four independent Philox blocks, one per 64-bit lane; each 32-bit word of
// the state sits in the low half of a lane so _mm256_mul_epu32 applies.
struct PhiloxLanes {
  __m256i c0, c1, c2, c3;
};

// Rounds for kGroups independent sets of four blocks. The groups share the key
// schedule and are interleaved to hide the multiply latency.
constexpr int kGroups = 3;

template <int G>
inline void philox_rounds(PhiloxLanes (&s)[G], __m256i k0, __m256i k1) {
  const __m256i lo_mask = _mm256_set1_epi64x(0xffffffffll);
  const __m256i mul0 = _mm256_set1_epi64x(philox::kMul0);
  const __m256i mul1 = _mm256_set1_epi64x(philox::kMul1);
  const __m256i weyl0 = _mm256_set1_epi64x(philox::kWeyl0);
  const __m256i weyl1 = _mm256_set1_epi64x(philox::kWeyl1);
  for (int round = 0; round < philox::kRounds; ++round) {
    for (auto& g : s) {
      const __m256i p0 = _mm256_mul_epu32(g.c0, mul0);
      const __m256i p1 = _mm256_mul_epu32(g.c2, mul1);
      const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(_mm256_srli_epi64(p1, 32), g.c1), k0);
      const __m256i n1 = _mm256_and_si256(p1, lo_mask);
      const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(_mm256_srli_epi64(p0, 32), g.c3), k1);
      const __m256i n3 = _mm256_and_si256(p0, lo_mask);
      g = {n0, n1, n2, n3};
    }
    k0 = _mm256_and_si256(_mm256_add_epi64(k0, weyl0), lo_mask);
    k1 = _mm256_and_si256(_mm256_add_epi64(k1, weyl1), lo_mask);
  }
}

// bits_to_open_unit for four lanes: (bits >> 12) is exact as a double via the
// 2^52 exponent trick.
inline __m256d to_open_unit(__m256i lo32, __m256i hi32) {
  const __m256i bits = _mm256_or_si256(lo32, _mm256_slli_epi64(hi32, 32));
  const __m256i mant = _mm256_srli_epi64(bits, 12);
  const __m256d two52 = _mm256_set1_pd(0x1.0p52);
  const __m256d m = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(mant, _mm256_castpd_si256(two52))), two52);
  return _mm256_mul_pd(_mm256_add_pd(m, _mm256_set1_pd(0.5)), _mm256_set1_pd(0x1.0p-52));
}

// Natural log for positive normal inputs: x = m 2^e with m in [sqrt(1/2), sqrt(2)),
// log m = 2 atanh(s), s = (m-1)/(m+1), |s| < 0.172.
inline __m256d log_pd(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i exp_bits = _mm256_srli_epi64(bits, 52);
  const __m256d two52 = _mm256_set1_pd(0x1.0p52);
  __m256d e = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(exp_bits, _mm256_castpd_si256(two52))), two52);
  e = _mm256_sub_pd(e, _mm256_set1_pd(1023.0));
  const __m256i mant_mask = _mm256_set1_epi64x(0x000fffffffffffffll);
  const __m256i one_bits = _mm256_set1_epi64x(0x3ff0000000000000ll);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));
  const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(1.4142135623730951), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  e = _mm256_add_pd(e, _mm256_and_pd(big, _mm256_set1_pd(1.0)));

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
  const __m256d s2 = _mm256_mul_pd(s, s);
  __m256d p = _mm256_set1_pd(1.0 / 23.0);
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 21.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 19.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 17.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 15.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 13.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 11.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 9.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 7.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 5.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 3.0));
  // p = 1/3 + s2/5 + ..., so atanh(s) = s + s^3 p.
  const __m256d tail = _mm256_mul_pd(_mm256_mul_pd(s, s2), p);
  const __m256d log_m = _mm256_mul_pd(_mm256_set1_pd(2.0), _mm256_add_pd(s, tail));
  return _mm256_fmadd_pd(e, _mm256_set1_pd(0.69314718055994530942), log_m);
}

// sin and cos of 2πu for u in (0, 1). 4u is exact, so the quadrant reduction
// introduces no error; the residual angle lies in [-π/4, π/4].
inline void sincos_2pi(__m256d u, __m256d& sin_out, __m256d& cos_out) {
  const __m256d t = _mm256_mul_pd(u, _mm256_set1_pd(4.0));
  const __m256d q = _mm256_round_pd(t, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  const __m256d a = _mm256_mul_pd(_mm256_sub_pd(t, q), _mm256_set1_pd(1.5707963267948966));
  const __m256d a2 = _mm256_mul_pd(a, a);

  __m256d sp = _mm256_set1_pd(1.0 / 355687428096000.0);
  sp = _mm256_fmadd_pd(sp, a2, _mm256_set1_pd(-1.0 / 1307674368000.0));
  sp = _mm256_fmadd_pd(sp, a2, _mm256_set1_pd(1.0 / 6227020800.0));
  sp = _mm256_fmadd_pd(sp, a2, _mm256_set1_pd(-1.0 / 39916800.0));
  sp = _mm256_fmadd_pd(sp, a2, _mm256_set1_pd(1.0 / 362880.0));
  sp = _mm256_fmadd_pd(sp, a2, _mm256_set1_pd(-1.0 / 5040.0));
  sp = _mm256_fmadd_pd(sp, a2, _mm256_set1_pd(1.0 / 120.0));
  sp = _mm256_fmadd_pd(sp, a2, _mm256_set1_pd(-1.0 / 6.0));
  const __m256d s = _mm256_fmadd_pd(_mm256_mul_pd(sp, a2), a, a);

  __m256d cp = _mm256_set1_pd(1.0 / 20922789888000.0);
  cp = _mm256_fmadd_pd(cp, a2, _mm256_set1_pd(-1.0 / 87178291200.0));
  cp = _mm256_fmadd_pd(cp, a2, _mm256_set1_pd(1.0 / 479001600.0));
  cp = _mm256_fmadd_pd(cp, a2, _mm256_set1_pd(-1.0 / 3628800.0));
  cp = _mm256_fmadd_pd(cp, a2, _mm256_set1_pd(1.0 / 40320.0));
  cp = _mm256_fmadd_pd(cp, a2, _mm256_set1_pd(-1.0 / 720.0));
  cp = _mm256_fmadd_pd(cp, a2, _mm256_set1_pd(1.0 / 24.0));
  cp = _mm256_fmadd_pd(cp, a2, _mm256_set1_pd(-0.5));
  const __m256d c = _mm256_fmadd_pd(cp, a2, _mm256_set1_pd(1.0));

  // Quadrant q mod 4 (q is one of 0..4).
  const __m256d four = _mm256_set1_pd(4.0);
  const __m256d qm = _mm256_blendv_pd(q, _mm256_setzero_pd(), _mm256_cmp_pd(q, four, _CMP_EQ_OQ));
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d three = _mm256_set1_pd(3.0);
  const __m256d odd = _mm256_or_pd(_mm256_cmp_pd(qm, one, _CMP_EQ_OQ), _mm256_cmp_pd(qm, three, _CMP_EQ_OQ));
  const __m256d sin_neg = _mm256_cmp_pd(qm, two, _CMP_GE_OQ);
  const __m256d cos_neg = _mm256_or_pd(_mm256_cmp_pd(qm, one, _CMP_EQ_OQ), _mm256_cmp_pd(qm, two, _CMP_EQ_OQ));
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d sv = _mm256_blendv_pd(s, c, odd);
  const __m256d cv = _mm256_blendv_pd(c, s, odd);
  sin_out = _mm256_xor_pd(sv, _mm256_and_pd(sin_neg, sign));
  cos_out = _mm256_xor_pd(cv, _mm256_and_pd(cos_neg, sign));
}

}  // namespace

void philox_uniforms(std::uint64_t key, std::uint64_t stream_id, std::uint64_t first_block,
                     std::span<double> out) {
  if (out.size() % 2 != 0) throw std::invalid_argument("philox_uniforms: odd output size");
  const std::size_t blocks = out.size() / 2;
  const __m256i k0 = _mm256_set1_epi64x(static_cast<std::uint32_t>(key));
  const __m256i k1 = _mm256_set1_epi64x(static_cast<std::uint32_t>(key >> 32));
  const __m256i id_lo = _mm256_set1_epi64x(static_cast<std::uint32_t>(stream_id));
  const __m256i id_hi = _mm256_set1_epi64x(static_cast<std::uint32_t>(stream_id >> 32));
  const __m256i lo_mask = _mm256_set1_epi64x(0xffffffffll);
  auto run = [&]<int G>(std::size_t start) {
    PhiloxLanes s[G];
    for (int g = 0; g < G; ++g) {
      const std::uint64_t b = first_block + start + 4 * static_cast<std::size_t>(g);
      // Block indices wrap like the scalar counter; a carry into the high word
      // is handled per lane.
      const __m256i idx = _mm256_set_epi64x(static_cast<long long>(b + 3), static_cast<long long>(b + 2),
                                            static_cast<long long>(b + 1), static_cast<long long>(b));
      s[g] = {_mm256_and_si256(idx, lo_mask), _mm256_srli_epi64(idx, 32), id_lo, id_hi};
    }
    philox_rounds<G>(s, k0, k1);
    for (int g = 0; g < G; ++g) {
      const __m256d first = to_open_unit(s[g].c0, s[g].c1);
      const __m256d second = to_open_unit(s[g].c2, s[g].c3);
      const __m256d lo = _mm256_unpacklo_pd(first, second);   // f0 s0 f2 s2
      const __m256d hi = _mm256_unpackhi_pd(first, second);   // f1 s1 f3 s3
      double* dst = out.data() + 2 * (start + 4 * static_cast<std::size_t>(g));
      _mm256_storeu_pd(dst, _mm256_permute2f128_pd(lo, hi, 0x20));
      _mm256_storeu_pd(dst + 4, _mm256_permute2f128_pd(lo, hi, 0x31));
    }
  };
  std::size_t i = 0;
  for (; i + 4 * kGroups <= blocks; i += 4 * kGroups) run.template operator()<kGroups>(i);
  for (; i + 4 <= blocks; i += 4) run.template operator()<1>(i);
  if (i < blocks) scalar::philox_uniforms(key, stream_id, first_block + i, out.subspan(2 * i));
}

void box_muller(std::span<double> data) {
  if (data.size() % 2 != 0) throw std::invalid_argument("box_muller: odd size");
  std::size_t i = 0;
  for (; i + 8 <= data.size(); i += 8) {
    const __m256d v0 = _mm256_loadu_pd(data.data() + i);
    const __m256d v1 = _mm256_loadu_pd(data.data() + i + 4);
    const __m256d u1 = _mm256_unpacklo_pd(v0, v1);
    const __m256d u2 = _mm256_unpackhi_pd(v0, v1);
    const __m256d radius = _mm256_sqrt_pd(_mm256_mul_pd(_mm256_set1_pd(-2.0), log_pd(u1)));
    __m256d s, c;
    sincos_2pi(u2, s, c);
    const __m256d z1 = _mm256_mul_pd(radius, c);
    const __m256d z2 = _mm256_mul_pd(radius, s);
    _mm256_storeu_pd(data.data() + i, _mm256_unpacklo_pd(z1, z2));
    _mm256_storeu_pd(data.data() + i + 4, _mm256_unpackhi_pd(z1, z2));
  }
  if (i < data.size()) scalar::box_muller(data.subspan(i));
}

std::size_t brownian_scan(double& x, std::span<const double> z, double scale, double lo, double hi) {
  const __m256d vscale = _mm256_set1_pd(scale);
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vhi = _mm256_set1_pd(hi);
  const __m256d zero = _mm256_setzero_pd();
  __m256d base = _mm256_set1_pd(x);
  std::size_t i = 0;
  for (; i + 4 <= z.size(); i += 4) {
    __m256d step = _mm256_mul_pd(_mm256_loadu_pd(z.data() + i), vscale);
    // In-register inclusive prefix sum over the four lanes.
    step = _mm256_add_pd(step, _mm256_blend_pd(_mm256_permute4x64_pd(step, 0x90), zero, 0x1));
    step = _mm256_add_pd(step, _mm256_blend_pd(_mm256_permute4x64_pd(step, 0x40), zero, 0x3));
    const __m256d pos = _mm256_add_pd(base, step);
    const __m256d out = _mm256_or_pd(_mm256_cmp_pd(pos, vlo, _CMP_LE_OQ), _mm256_cmp_pd(pos, vhi, _CMP_GE_OQ));
    const int mask = _mm256_movemask_pd(out);
    if (mask != 0) {
      alignas(32) double lanes[4];
      _mm256_store_pd(lanes, pos);
      const int lane = std::countr_zero(static_cast<unsigned>(mask));
      x = lanes[lane];
      return i + static_cast<std::size_t>(lane);
    }
    base = _mm256_permute4x64_pd(pos, 0xff);
  }
  x = _mm256_cvtsd_f64(base);
  const std::size_t rest = scalar::brownian_scan(x, z.subspan(i), scale, lo, hi);
  return i + rest;
}

}  // namespace branchpde::simd::avx2
