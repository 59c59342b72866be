#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"

#include "branchpde/rng.hpp"
#include "branchpde/simd/kernels.hpp"

using namespace branchpde;

TEST_CASE("philox block matches the Random123 known-answer vectors") {
  // Philox4x32-10 test vectors shipped with Random123 (kat_vectors).
  auto zero = philox::block({0, 0, 0, 0}, {0, 0});
  CHECK(zero == philox::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  auto ones = philox::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  CHECK(ones == philox::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  auto pi = philox::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  CHECK(pi == philox::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("bulk uniforms reproduce the scalar stream") {
  Stream s(0x1234, 77);
  std::vector<double> bulk(64);
  simd::scalar::philox_uniforms(s.key(), s.id(), 0, bulk);
  for (double v : bulk) CHECK(v == s.uniform());
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  if (!simd::isa_supported(simd::Isa::avx2)) return;
  for (std::size_t n : {2u, 6u, 8u, 10u, 256u, 1002u}) {
    std::vector<double> a(n), b(n);
    simd::scalar::philox_uniforms(0xdeadbeefcafef00dull, 42, 0xfffffffeull, a);
    simd::avx2::philox_uniforms(0xdeadbeefcafef00dull, 42, 0xfffffffeull, b);
    CHECK(a == b);

    simd::scalar::box_muller(a);
    simd::avx2::box_muller(b);
    for (std::size_t i = 0; i < n; ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-14).scale(1.0));
  }
}

TEST_CASE("avx2 log and sincos stay accurate at the extremes of (0, 1)") {
  if (!simd::isa_supported(simd::Isa::avx2)) return;
  std::vector<double> u;
  for (double v : {0x1.0p-53, 1e-300 + 0x1.0p-53, 1e-8, 0.125, 0.25, 0.5, 0.75, 1.0 - 0x1.0p-53, 0.999999}) u.push_back(v);
  for (double v : {0x1.0p-53, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0 - 0x1.0p-53}) u.push_back(v);
  std::vector<double> a;
  for (std::size_t i = 0; i < 9; ++i) { a.push_back(u[i]); a.push_back(u[9 + i]); }
  a.push_back(0.3); a.push_back(0.7);
  auto b = a;
  simd::scalar::box_muller(a);
  simd::avx2::box_muller(b);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-14 * std::max(1.0, std::abs(a[i])));
}

TEST_CASE("brownian scan finds the same exit in both variants") {
  Stream s(9, 9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> z(2 + trial * 7);
    for (auto& v : z) v = s.normal();
    double xs = 0.1, xv = 0.1;
    const auto is = simd::scalar::brownian_scan(xs, z, 0.05, -0.5, 0.6);
    if (!simd::isa_supported(simd::Isa::avx2)) continue;
    const auto iv = simd::avx2::brownian_scan(xv, z, 0.05, -0.5, 0.6);
    CHECK(is == iv);
    CHECK(xs == doctest::Approx(xv).epsilon(1e-12));
  }
}

TEST_CASE("dispatcher honours set_isa") {
  simd::set_isa(simd::Isa::scalar);
  CHECK(simd::active_isa() == simd::Isa::scalar);
  simd::set_isa(simd::detect_isa());
  CHECK(simd::active_isa() == simd::detect_isa());
}
