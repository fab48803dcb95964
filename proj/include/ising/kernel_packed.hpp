#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <stdexcept>

#include "ising/acceptance.hpp"
#include "ising/lattice.hpp"
#include "ising/packed.hpp"
#include "ising/rng.hpp"

namespace ising {

template <class P>
concept WordSource = requires(const P& p, std::size_t i) {
  { p.rows() } -> std::convertible_to<std::size_t>;
  { p.word_cols() } -> std::convertible_to<std::size_t>;
  { p.word(i, i) } -> std::convertible_to<std::uint64_t>;
};

/// The four source words whose lanes line up with the 16 spins of one target word.
struct NeighborWords {
  std::uint64_t north = 0;
  std::uint64_t center = 0;
  std::uint64_t south = 0;
  std::uint64_t side = 0;

  friend constexpr bool operator==(const NeighborWords&, const NeighborWords&) = default;
};

/// Black targets on even rows (white on odd rows) need their off-column
/// neighbor from the west: the center word shifted one lane up with the top
/// lane of the western word spliced into lane 0. Otherwise mirror image, east.
template <WordSource Source>
NeighborWords gather_neighbor_words(const Source& source, Color target, std::size_t i, std::size_t wj) {
  const std::size_t n = source.rows();
  const std::size_t wc = source.word_cols();
  const std::size_t ipp = i + 1 < n ? i + 1 : 0;
  const std::size_t inn = i > 0 ? i - 1 : n - 1;

  NeighborWords w;
  w.north = source.word(inn, wj);
  w.center = source.word(i, wj);
  w.south = source.word(ipp, wj);
  const bool east = (target == Color::black) == (i % 2 == 1);
  if (east) {
    const std::size_t wjp = wj + 1 < wc ? wj + 1 : 0;
    w.side = (w.center >> 4) | ((source.word(i, wjp) & 0xFULL) << 60);
  } else {
    const std::size_t wjm = wj > 0 ? wj - 1 : wc - 1;
    w.side = (w.center << 4) | (source.word(i, wjm) >> 60);
  }
  return w;
}

/// Lane k of the result is the sum of lane k of the four words. With lanes in
/// {0, 1} every lane sum is at most 4, so no carry crosses a nibble.
constexpr std::uint64_t lanewise_sum(const NeighborWords& w) noexcept {
  return w.north + w.center + w.south + w.side;
}

/// XOR mask (one 0/1 nibble per lane) of lanes that flip, scalar reference form.
inline std::uint64_t flip_mask_portable(std::uint64_t target_word, std::uint64_t sums, const AcceptanceTable& table,
                                        std::uint64_t seed, std::uint64_t first_sequence,
                                        std::uint64_t offset) noexcept {
  std::uint32_t draws[kLanesPerWord];
  raw_draws16(seed, first_sequence, offset, draws);
  const auto& thresholds = table.thresholds();
  std::uint64_t mask = 0;
  for (std::size_t k = 0; k < kLanesPerWord; ++k) {
    const unsigned lane = static_cast<unsigned>((target_word >> (4 * k)) & 0x1);
    const unsigned sum = static_cast<unsigned>((sums >> (4 * k)) & 0xF);
    const std::uint64_t flip = draws[k] < thresholds[lane * AcceptanceTable::kSums + sum] ? 1 : 0;
    mask |= flip << (4 * k);
  }
  return mask;
}

#if defined(ISING_SIMD_AVX512) && defined(__BMI2__)
namespace detail {

/// Thresholds padded to 16 entries for a two-register permute lookup.
struct ThresholdRegs {
  __m512i lo;
  __m512i hi;

  explicit ThresholdRegs(const AcceptanceTable& table) noexcept {
    alignas(64) std::uint64_t padded[16] = {};
    for (std::size_t k = 0; k < 2 * AcceptanceTable::kSums; ++k) padded[k] = table.thresholds()[k];
    lo = _mm512_load_si512(padded);
    hi = _mm512_load_si512(padded + 8);
  }
};

inline std::uint64_t flip_mask_avx512(std::uint64_t target_word, std::uint64_t sums, const ThresholdRegs& thr,
                                      std::uint64_t seed, std::uint64_t first_sequence, std::uint64_t offset) noexcept {
  __m512i draws[2];
  philox16_avx512(seed, first_sequence, offset, draws);
  const __m512i t = _mm512_set1_epi64(static_cast<long long>(target_word));
  const __m512i s = _mm512_set1_epi64(static_cast<long long>(sums));
  const __m512i one = _mm512_set1_epi64(1);
  const __m512i nibble = _mm512_set1_epi64(0xF);
  std::uint32_t bits = 0;
  for (int h = 0; h < 2; ++h) {
    const __m512i shifts = _mm512_set_epi64(32 * h + 28, 32 * h + 24, 32 * h + 20, 32 * h + 16, 32 * h + 12,
                                            32 * h + 8, 32 * h + 4, 32 * h);
    const __m512i lane = _mm512_and_si512(_mm512_srlv_epi64(t, shifts), one);
    const __m512i sum = _mm512_and_si512(_mm512_srlv_epi64(s, shifts), nibble);
    const __m512i idx = _mm512_add_epi64(_mm512_add_epi64(_mm512_slli_epi64(lane, 2), lane), sum);
    const __m512i limit = _mm512_permutex2var_epi64(thr.lo, idx, thr.hi);
    bits |= static_cast<std::uint32_t>(_mm512_cmplt_epu64_mask(draws[h], limit)) << (8 * h);
  }
  return _pdep_u64(bits, kLaneOnes);
}

}  // namespace detail
#endif

/// Updates target rows [row_begin, row_end), one 16-spin word at a time.
template <WordSource Source>
void update_rows_packed(PackedPlane& target, const Source& source, const AcceptanceTable& table,
                        std::uint64_t seed, std::uint64_t step, std::size_t row_begin, std::size_t row_end) {
  const Color color = target.color();
  const std::uint64_t offset = event_offset(step, color);
  const std::size_t wc = target.word_cols();
  const std::size_t plane_cols = target.cols();
#if defined(ISING_SIMD_AVX512) && defined(__BMI2__)
  const detail::ThresholdRegs regs(table);
#endif
  for (std::size_t i = row_begin; i < row_end; ++i) {
    for (std::size_t wj = 0; wj < wc; ++wj) {
      const std::uint64_t sums = lanewise_sum(gather_neighbor_words(source, color, i, wj));
      std::uint64_t& t = target.word(i, wj);
      const std::uint64_t first = i * plane_cols + wj * kLanesPerWord;
#if defined(ISING_SIMD_AVX512) && defined(__BMI2__)
      t ^= detail::flip_mask_avx512(t, sums, regs, seed, first, offset);
#else
      t ^= flip_mask_portable(t, sums, table, seed, first, offset);
#endif
    }
  }
}

inline void update_color_packed(PackedPlane& target, const PackedPlane& source, const AcceptanceTable& table,
                                std::uint64_t seed, std::uint64_t step) {
  update_rows_packed(target, source, table, seed, step, 0, target.rows());
}

inline void update_color_packed(PackedPlane& target, const PackedPlane& source, double beta, std::uint64_t seed,
                                std::uint64_t step) {
  update_color_packed(target, source, AcceptanceTable(beta, UpdateRule::metropolis), seed, step);
}

inline void sweep_packed(PackedLattice& lat, const AcceptanceTable& table, std::uint64_t seed, std::uint64_t step) {
  if (step == 0) throw std::invalid_argument("sweep steps start at 1");
  update_color_packed(lat.black, lat.white, table, seed, step);
  update_color_packed(lat.white, lat.black, table, seed, step);
}

}  // namespace ising
