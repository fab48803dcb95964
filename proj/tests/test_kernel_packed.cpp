#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

using namespace ising;

namespace {

PackedPlane zero_plane(Color c, std::size_t rows, std::size_t word_cols) {
  return pack(SpinPlane(c, rows, word_cols * kLanesPerWord, -1));
}

}  // namespace

TEST(KernelPacked, UniformSideWord) {
  const PackedPlane up = pack(SpinPlane(Color::white, 4, 32, 1));
  for (Color c : {Color::black, Color::white}) {
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_EQ(gather_neighbor_words(up, c, i, 1).side, 0x1111111111111111ULL);
    }
  }
}

TEST(KernelPacked, WestSpliceCarriesLane15) {
  PackedPlane src = zero_plane(Color::white, 4, 2);
  src.word(2, 0) = 0x1ULL << 60;  // lane 15 of word (2, 0)
  const NeighborWords w = gather_neighbor_words(src, Color::black, 2, 1);
  EXPECT_EQ(w.side, 0x1ULL);
  EXPECT_EQ(w.center, 0ULL);
}

TEST(KernelPacked, EastSpliceCarriesLane0) {
  PackedPlane src = zero_plane(Color::white, 4, 2);
  src.word(1, 0) = 0x1ULL;  // lane 0 of word (1, 0), east of word (1, 1) after wrap
  EXPECT_EQ(gather_neighbor_words(src, Color::black, 1, 1).side, 0x1ULL << 60);
  EXPECT_EQ(gather_neighbor_words(src, Color::white, 1, 1).side, 0ULL);
}

TEST(KernelPacked, LanewiseSumExamples) {
  EXPECT_EQ(lanewise_sum({kLaneOnes, kLaneOnes, kLaneOnes, kLaneOnes}), 0x4444444444444444ULL);
  EXPECT_EQ(lanewise_sum({0, 0, 0, 0}), 0ULL);
  static_assert(lanewise_sum({1, 1, 1, 0}) == 3);
}

TEST(KernelPacked, LanewiseSumHasNoCarry) {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 100'000; ++trial) {
    const NeighborWords w{gen() & kLaneOnes, gen() & kLaneOnes, gen() & kLaneOnes, gen() & kLaneOnes};
    const std::uint64_t s = lanewise_sum(w);
    ASSERT_EQ(s & 0x8888888888888888ULL, 0ULL);
    for (int k = 0; k < 16; ++k) {
      const unsigned expect = static_cast<unsigned>(((w.north >> (4 * k)) & 1) + ((w.center >> (4 * k)) & 1) +
                                                    ((w.south >> (4 * k)) & 1) + ((w.side >> (4 * k)) & 1));
      ASSERT_EQ((s >> (4 * k)) & 0xF, expect);
    }
  }
}

TEST(KernelPacked, LaneSumsMatchScalarStencil) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = 2 + 2 * (gen() % 6);
    const std::size_t cols = 32 * (1 + gen() % 3);
    const Lattice lat = ising_test::random_lattice({rows, cols}, gen());
    const PackedLattice packed = pack(lat);
    for (Color c : {Color::black, Color::white}) {
      const SpinPlane& src = lat.plane(opposite(c));
      const PackedPlane& psrc = packed.plane(opposite(c));
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t wj = 0; wj < psrc.word_cols(); ++wj) {
          const std::uint64_t sums = lanewise_sum(gather_neighbor_words(psrc, c, i, wj));
          for (std::size_t k = 0; k < kLanesPerWord; ++k) {
            const int lane_sum = static_cast<int>((sums >> (4 * k)) & 0xF);
            ASSERT_EQ(2 * lane_sum - 4, neighbor_sum(src, c, i, wj * kLanesPerWord + k));
          }
        }
      }
    }
  }
}

TEST(KernelPacked, InfiniteTemperatureTogglesEveryLane) {
  const PackedLattice start = pack(ising_test::random_lattice({4, 64}, 3));
  PackedLattice lat = start;
  update_color_packed(lat.black, lat.white, 0.0, 8, 1);
  for (std::size_t k = 0; k < lat.black.words().size(); ++k) {
    EXPECT_EQ(lat.black.words()[k], start.black.words()[k] ^ kLaneOnes);
  }
}

TEST(KernelPacked, FlipMaskMatchesScalarDecision) {
  std::mt19937_64 gen(4);
  for (double beta : {0.1, 0.4407, 1.0}) {
    for (UpdateRule rule : {UpdateRule::metropolis, UpdateRule::heatbath}) {
      const AcceptanceTable table(beta, rule);
      for (int trial = 0; trial < 2000; ++trial) {
        const std::uint64_t t = gen() & kLaneOnes;
        std::uint64_t sums = 0;
        for (int k = 0; k < 16; ++k) sums |= (gen() % 5) << (4 * k);
        const std::uint64_t seed = gen(), first = gen() >> 8, offset = gen() >> 2;
        const std::uint64_t mask = flip_mask_portable(t, sums, table, seed, first, offset);
#if defined(ISING_SIMD_AVX512) && defined(__BMI2__)
        ASSERT_EQ(detail::flip_mask_avx512(t, sums, detail::ThresholdRegs(table), seed, first, offset), mask);
#endif
        for (std::uint64_t k = 0; k < 16; ++k) {
          const int s = ((t >> (4 * k)) & 1) ? 1 : -1;
          const int nn = 2 * static_cast<int>((sums >> (4 * k)) & 0xF) - 4;
          const bool flip = uniform_for({seed, first + k, offset}) < table.probability(s, nn);
          ASSERT_EQ((mask >> (4 * k)) & 0xF, flip ? 1u : 0u);
        }
      }
    }
  }
}

TEST(KernelPacked, SweepsMatchBasicKernel) {
  for (UpdateRule rule : {UpdateRule::metropolis, UpdateRule::heatbath}) {
    for (double beta : {0.2, 0.4407, 0.8}) {
      Lattice basic = init_lattice({8, 64}, 31, InitMode::hot);
      PackedLattice packed = pack(basic);
      const AcceptanceTable t(beta, rule);
      for (std::uint64_t step = 1; step <= 30; ++step) {
        sweep(basic, t, 31, step);
        sweep_packed(packed, t, 31, step);
      }
      EXPECT_TRUE(packed.black.lanes_valid());
      EXPECT_TRUE(unpack(packed) == basic);
    }
  }
}

TEST(KernelPacked, StepZeroRejected) {
  PackedLattice lat = pack(Lattice({4, 32}, 1));
  EXPECT_THROW(sweep_packed(lat, AcceptanceTable(0.4, UpdateRule::metropolis), 1, 0), std::invalid_argument);
}
