#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#if !defined(ISING_NO_SIMD) && (defined(__AVX512F__) || defined(__AVX2__))
#include <immintrin.h>
#endif

#if !defined(ISING_NO_SIMD) && defined(__AVX512F__)
#define ISING_SIMD_AVX512 1
#elif !defined(ISING_NO_SIMD) && defined(__AVX2__)
#define ISING_SIMD_AVX2 1
#endif

namespace ising {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;
inline constexpr int kPhiloxRounds = 10;

constexpr PhiloxCounter philox_round(const PhiloxCounter& c, const PhiloxKey& k) noexcept {
  const std::uint64_t p0 = std::uint64_t{kPhiloxM0} * c[0];
  const std::uint64_t p1 = std::uint64_t{kPhiloxM1} * c[2];
  return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
          static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
}

}  // namespace detail

/// Philox4x32 with 10 rounds (Salmon et al. counter-based generator).
constexpr PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
  for (int r = 0; r < detail::kPhiloxRounds; ++r) {
    if (r != 0) {
      key[0] += detail::kPhiloxW0;
      key[1] += detail::kPhiloxW1;
    }
    ctr = detail::philox_round(ctr, key);
  }
  return ctr;
}

/// Selects one generator block. `sequence` is the site index inside its color
/// plane (row * plane_cols + col); `offset` is 2 * step + color index.
struct RngAddress {
  std::uint64_t seed = 0;
  std::uint64_t sequence = 0;
  std::uint64_t offset = 0;

  friend constexpr bool operator==(const RngAddress&, const RngAddress&) = default;
};

/// Packing: sequence -> counter words 0,1; offset -> counter words 2,3; seed -> key.
/// Low halves go first.
constexpr PhiloxCounter counter_for(const RngAddress& a) noexcept {
  return {static_cast<std::uint32_t>(a.sequence), static_cast<std::uint32_t>(a.sequence >> 32),
          static_cast<std::uint32_t>(a.offset), static_cast<std::uint32_t>(a.offset >> 32)};
}

constexpr PhiloxKey key_for(std::uint64_t seed) noexcept {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

/// First 32-bit output word of the block at `a`.
constexpr std::uint32_t raw_draw(const RngAddress& a) noexcept {
  return philox4x32_10(counter_for(a), key_for(a.seed))[0];
}

inline constexpr double kTwoPowMinus32 = 0x1p-32;

/// Uniform in [0, 1): raw_draw * 2^-32, exact in double.
constexpr double uniform_for(const RngAddress& a) noexcept {
  return static_cast<double>(raw_draw(a)) * kTwoPowMinus32;
}

/// raw_draw for `Lanes` consecutive sequences starting at `first_sequence`,
/// all at the same offset. Written lane-parallel so the compiler can vectorize it.
template <std::size_t Lanes>
inline void raw_draws(std::uint64_t seed, std::uint64_t first_sequence, std::uint64_t offset,
                      std::uint32_t* out) noexcept {
  std::uint32_t c0[Lanes];
  std::uint32_t c1[Lanes];
  std::uint32_t c2[Lanes];
  std::uint32_t c3[Lanes];
  for (std::size_t k = 0; k < Lanes; ++k) {
    const std::uint64_t seq = first_sequence + k;
    c0[k] = static_cast<std::uint32_t>(seq);
    c1[k] = static_cast<std::uint32_t>(seq >> 32);
    c2[k] = static_cast<std::uint32_t>(offset);
    c3[k] = static_cast<std::uint32_t>(offset >> 32);
  }
  std::uint32_t k0 = static_cast<std::uint32_t>(seed);
  std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
  for (int r = 0; r < detail::kPhiloxRounds; ++r) {
    if (r != 0) {
      k0 += detail::kPhiloxW0;
      k1 += detail::kPhiloxW1;
    }
    for (std::size_t k = 0; k < Lanes; ++k) {
      const std::uint64_t p0 = std::uint64_t{detail::kPhiloxM0} * c0[k];
      const std::uint64_t p1 = std::uint64_t{detail::kPhiloxM1} * c2[k];
      const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1[k] ^ k0;
      const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3[k] ^ k1;
      c1[k] = static_cast<std::uint32_t>(p1);
      c3[k] = static_cast<std::uint32_t>(p0);
      c0[k] = n0;
      c2[k] = n2;
    }
  }
  for (std::size_t k = 0; k < Lanes; ++k) out[k] = c0[k];
}

#if defined(ISING_SIMD_AVX512)
namespace detail {

/// 16 consecutive-sequence draws as two vectors of eight 64-bit lanes, each
/// holding a 32-bit draw. Counter words live in the low halves of 64-bit
/// lanes so vpmuludq yields the full 32x32 -> 64 product.
inline void philox16_avx512(std::uint64_t seed, std::uint64_t first_sequence, std::uint64_t offset,
                            __m512i out[2]) noexcept {
  const __m512i lo = _mm512_set1_epi64(0xFFFFFFFFLL);
  const __m512i m0 = _mm512_set1_epi64(kPhiloxM0);
  const __m512i m1 = _mm512_set1_epi64(kPhiloxM1);
  const __m512i ramp = _mm512_set_epi64(7, 6, 5, 4, 3, 2, 1, 0);
  __m512i c0[2], c1[2], c2[2], c3[2];
  for (int h = 0; h < 2; ++h) {
    const __m512i seq = _mm512_add_epi64(_mm512_set1_epi64(static_cast<long long>(first_sequence + 8 * h)), ramp);
    c0[h] = _mm512_and_si512(seq, lo);
    c1[h] = _mm512_srli_epi64(seq, 32);
    c2[h] = _mm512_set1_epi64(static_cast<long long>(offset & 0xFFFFFFFFULL));
    c3[h] = _mm512_set1_epi64(static_cast<long long>(offset >> 32));
  }
  std::uint32_t k0 = static_cast<std::uint32_t>(seed);
  std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
  for (int r = 0; r < kPhiloxRounds; ++r) {
    if (r != 0) {
      k0 += kPhiloxW0;
      k1 += kPhiloxW1;
    }
    const __m512i key0 = _mm512_set1_epi64(k0);
    const __m512i key1 = _mm512_set1_epi64(k1);
    for (int h = 0; h < 2; ++h) {
      const __m512i p0 = _mm512_mul_epu32(c0[h], m0);
      const __m512i p1 = _mm512_mul_epu32(c2[h], m1);
      const __m512i n0 = _mm512_ternarylogic_epi64(_mm512_srli_epi64(p1, 32), c1[h], key0, 0x96);
      const __m512i n2 = _mm512_ternarylogic_epi64(_mm512_srli_epi64(p0, 32), c3[h], key1, 0x96);
      c1[h] = _mm512_and_si512(p1, lo);
      c3[h] = _mm512_and_si512(p0, lo);
      c0[h] = n0;
      c2[h] = n2;
    }
  }
  out[0] = c0[0];
  out[1] = c0[1];
}

}  // namespace detail
#elif defined(ISING_SIMD_AVX2)
namespace detail {

/// Same as the AVX-512 path with four vectors of four 64-bit lanes.
inline void philox16_avx2(std::uint64_t seed, std::uint64_t first_sequence, std::uint64_t offset,
                          __m256i out[4]) noexcept {
  const __m256i lo = _mm256_set1_epi64x(0xFFFFFFFFLL);
  const __m256i m0 = _mm256_set1_epi64x(kPhiloxM0);
  const __m256i m1 = _mm256_set1_epi64x(kPhiloxM1);
  const __m256i ramp = _mm256_set_epi64x(3, 2, 1, 0);
  __m256i c0[4], c1[4], c2[4], c3[4];
  for (int h = 0; h < 4; ++h) {
    const __m256i seq = _mm256_add_epi64(_mm256_set1_epi64x(static_cast<long long>(first_sequence + 4 * h)), ramp);
    c0[h] = _mm256_and_si256(seq, lo);
    c1[h] = _mm256_srli_epi64(seq, 32);
    c2[h] = _mm256_set1_epi64x(static_cast<long long>(offset & 0xFFFFFFFFULL));
    c3[h] = _mm256_set1_epi64x(static_cast<long long>(offset >> 32));
  }
  std::uint32_t k0 = static_cast<std::uint32_t>(seed);
  std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
  for (int r = 0; r < kPhiloxRounds; ++r) {
    if (r != 0) {
      k0 += kPhiloxW0;
      k1 += kPhiloxW1;
    }
    const __m256i key0 = _mm256_set1_epi64x(k0);
    const __m256i key1 = _mm256_set1_epi64x(k1);
    for (int h = 0; h < 4; ++h) {
      const __m256i p0 = _mm256_mul_epu32(c0[h], m0);
      const __m256i p1 = _mm256_mul_epu32(c2[h], m1);
      const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(_mm256_srli_epi64(p1, 32), c1[h]), key0);
      const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(_mm256_srli_epi64(p0, 32), c3[h]), key1);
      c1[h] = _mm256_and_si256(p1, lo);
      c3[h] = _mm256_and_si256(p0, lo);
      c0[h] = n0;
      c2[h] = n2;
    }
  }
  for (int h = 0; h < 4; ++h) out[h] = c0[h];
}

}  // namespace detail
#endif

/// raw_draw for 16 consecutive sequences; uses the widest vector path compiled in.
inline void raw_draws16(std::uint64_t seed, std::uint64_t first_sequence, std::uint64_t offset,
                        std::uint32_t* out) noexcept {
#if defined(ISING_SIMD_AVX512)
  __m512i v[2];
  detail::philox16_avx512(seed, first_sequence, offset, v);
  _mm256_storeu_si256(reinterpret_cast<__m256i*>(out), _mm512_cvtepi64_epi32(v[0]));
  _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + 8), _mm512_cvtepi64_epi32(v[1]));
#elif defined(ISING_SIMD_AVX2)
  __m256i v[4];
  detail::philox16_avx2(seed, first_sequence, offset, v);
  alignas(32) std::uint64_t tmp[16];
  for (int h = 0; h < 4; ++h) _mm256_store_si256(reinterpret_cast<__m256i*>(tmp + 4 * h), v[h]);
  for (int k = 0; k < 16; ++k) out[k] = static_cast<std::uint32_t>(tmp[k]);
#else
  raw_draws<16>(seed, first_sequence, offset, out);
#endif
}

}  // namespace ising
