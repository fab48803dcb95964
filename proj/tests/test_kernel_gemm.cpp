#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

using namespace ising;

namespace {

// Completed sums for one color must equal the scalar stencil at every target site.
void expect_sums_match_stencil(const Lattice& lat, std::size_t block) {
  const BlockLattice blocks = to_blocks(lat, block);
  for (Color c : {Color::black, Color::white}) {
    LocalSums sums = local_sums(blocks, c);
    boundary_fixup(sums, blocks, c);
    const auto targets = target_blocks(c);
    for (std::size_t s = 0; s < blocks.sub_count(); ++s) {
      for (std::size_t slot = 0; slot < 2; ++slot) {
        for (std::size_t a = 0; a < block; ++a) {
          for (std::size_t b = 0; b < block; ++b) {
            const SiteCoord site = blocks.site(s, targets[slot], a, b);
            const PlaneCoord p = full_to_plane(lat.geometry, site.row, site.col);
            ASSERT_EQ(p.color, c);
            ASSERT_EQ(sums.at(s, slot, a, b), neighbor_sum(lat.plane(opposite(c)), c, p.row, p.col))
                << "site " << site.row << "," << site.col << " B=" << block;
          }
        }
      }
    }
  }
}

}  // namespace

TEST(KernelMatrix, SmallCases) {
  const KernelMatrix k2(2);
  EXPECT_EQ(k2(0, 0), 1);
  EXPECT_EQ(k2(0, 1), 1);
  EXPECT_EQ(k2(1, 0), 0);
  EXPECT_EQ(k2(1, 1), 1);
  const KernelMatrix k3 = build_kernel_matrix(3);
  const int expect[3][3] = {{1, 1, 0}, {0, 1, 1}, {0, 0, 1}};
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(k3(r, c), expect[r][c]);
  }
  EXPECT_THROW(KernelMatrix(1), std::invalid_argument);
}

TEST(KernelMatrix, RowSumsAndUsefulFraction) {
  for (std::size_t b : {2u, 5u, 16u, 128u}) {
    const KernelMatrix k(b);
    for (std::size_t r = 0; r < b; ++r) {
      int sum = 0;
      for (std::size_t c = 0; c < b; ++c) sum += k(r, c);
      EXPECT_EQ(sum, r + 1 < b ? 2 : 1);
    }
    EXPECT_EQ(k.nonzeros(), 2 * b - 1);
  }
  const KernelMatrix k128(128);
  EXPECT_EQ(useful_product_count(k128), 255u * 128u);
  EXPECT_NEAR(useful_fraction(k128), 1.0 / 64.0, 1e-3);
}

TEST(BatchedMatmul, MatchesNaiveProduct) {
  std::mt19937 gen(5);
  const std::size_t n = 4;
  std::vector<std::int8_t> a(n * n), b(n * n), out(n * n, 7);
  for (auto& x : a) x = static_cast<std::int8_t>(static_cast<int>(gen() % 3) - 1);
  for (auto& x : b) x = static_cast<std::int8_t>(static_cast<int>(gen() % 3) - 1);
  for (bool ta : {false, true}) {
    for (bool tb : {false, true}) {
      const MatmulTask task{a.data(), ta, b.data(), tb, out.data()};
      batched_matmul(std::span<const MatmulTask>(&task, 1), n, false);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
          int sum = 0;
          for (std::size_t k = 0; k < n; ++k) sum += (ta ? a[k * n + r] : a[r * n + k]) * (tb ? b[c * n + k] : b[k * n + c]);
          EXPECT_EQ(out[r * n + c], sum);
        }
      }
    }
  }
}

TEST(LocalSums, AllUpInteriorAndCorner) {
  const BlockLattice blocks = to_blocks(Lattice({4, 4}, 1), 2);
  const LocalSums sums = local_sums(blocks, Color::black);
  EXPECT_EQ(sums.at(0, 0, 1, 1), 4);
  EXPECT_EQ(sums.at(0, 0, 0, 0), 2);
}

TEST(LocalSums, SingleDownSpinDropsByTwo) {
  BlockLattice blocks = to_blocks(Lattice({4, 4}, 1), 2);
  blocks.at(0, Block::s01, 0, 0) = -1;
  const LocalSums sums = local_sums(blocks, Color::black);
  EXPECT_EQ(sums.at(0, 0, 0, 0), 0);
}

TEST(LocalSums, InteriorMatchesStencil) {
  const Lattice lat = ising_test::random_lattice({16, 16}, 9);
  const BlockLattice blocks = to_blocks(lat, 4);
  for (Color c : {Color::black, Color::white}) {
    const LocalSums sums = local_sums(blocks, c);
    const auto targets = target_blocks(c);
    for (std::size_t s = 0; s < blocks.sub_count(); ++s) {
      for (std::size_t slot = 0; slot < 2; ++slot) {
        for (std::size_t a = 1; a + 1 < 4; ++a) {
          for (std::size_t b = 1; b + 1 < 4; ++b) {
            const SiteCoord site = blocks.site(s, targets[slot], a, b);
            const PlaneCoord p = full_to_plane(lat.geometry, site.row, site.col);
            EXPECT_EQ(sums.at(s, slot, a, b), neighbor_sum(lat.plane(opposite(c)), c, p.row, p.col));
          }
        }
      }
    }
  }
}

TEST(BoundaryFixup, UniformLattices) {
  for (Spin v : {Spin{1}, Spin{-1}}) {
    const BlockLattice blocks = to_blocks(Lattice({8, 8}, v), 2);
    for (Color c : {Color::black, Color::white}) {
      LocalSums sums = local_sums(blocks, c);
      boundary_fixup(sums, blocks, c);
      for (std::size_t s = 0; s < blocks.sub_count(); ++s) {
        for (std::size_t slot = 0; slot < 2; ++slot) {
          for (std::int8_t x : sums.slot(s, slot)) EXPECT_EQ(x, 4 * v);
        }
      }
    }
  }
}

TEST(BoundaryFixup, CompletedSumsMatchStencil) {
  std::mt19937_64 gen(10);
  int cases = 0;
  for (std::size_t block : {2u, 4u, 8u}) {
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t max_subs = 64 / (2 * block);
      const std::size_t rows = 2 * block * (1 + gen() % max_subs);
      const std::size_t cols = 2 * block * (1 + gen() % max_subs);
      expect_sums_match_stencil(ising_test::random_lattice({rows, cols}, gen()), block);
      ++cases;
    }
  }
  EXPECT_GE(cases, 100);
}

TEST(KernelGemm, InfiniteTemperatureFlipsTargets) {
  const Lattice start = ising_test::random_lattice({8, 8}, 2);
  BlockLattice blocks = to_blocks(start, 2);
  GemmWorkspace ws(blocks);
  update_color_gemm(blocks, ws, Color::white, AcceptanceTable(0.0, UpdateRule::metropolis), 1, 1);
  const Lattice after = from_blocks(blocks);
  for (std::size_t k = 0; k < start.white.cells().size(); ++k) EXPECT_EQ(after.white.cells()[k], -start.white.cells()[k]);
  EXPECT_TRUE(after.black == start.black);
}

TEST(KernelGemm, MatchesBasicTrajectory) {
  Lattice basic = init_lattice({64, 64}, 3, InitMode::hot);
  BlockLattice blocks = to_blocks(basic, 8);
  GemmWorkspace ws(blocks);
  const AcceptanceTable t(0.44, UpdateRule::metropolis);
  for (std::uint64_t step = 1; step <= 100; ++step) {
    sweep(basic, t, 3, step);
    sweep_gemm(blocks, ws, t, 3, step);
  }
  EXPECT_TRUE(from_blocks(blocks) == basic);
}

TEST(KernelGemm, HeatbathMatchesBasic) {
  Lattice basic = init_lattice({16, 24}, 4, InitMode::hot);
  BlockLattice blocks = to_blocks(basic, 2);
  GemmWorkspace ws(blocks);
  const AcceptanceTable t(0.6, UpdateRule::heatbath);
  for (std::uint64_t step = 1; step <= 40; ++step) {
    sweep(basic, t, 4, step);
    sweep_gemm(blocks, ws, t, 4, step);
  }
  EXPECT_TRUE(from_blocks(blocks) == basic);
}

TEST(KernelGemm, SubRangesComposeToFullUpdate) {
  const Lattice start = ising_test::random_lattice({32, 32}, 6);
  const AcceptanceTable t(0.4, UpdateRule::metropolis);
  BlockLattice whole = to_blocks(start, 4);
  GemmWorkspace ws_whole(whole);
  update_color_gemm(whole, ws_whole, Color::black, t, 2, 5);

  BlockLattice split = to_blocks(start, 4);
  GemmWorkspace ws_split(split);
  std::vector<MatmulTask> scratch;
  const std::size_t subs = split.sub_count();
  update_color_gemm_range(split, ws_split, Color::black, t, 2, 5, subs / 2, subs, scratch);
  update_color_gemm_range(split, ws_split, Color::black, t, 2, 5, 0, subs / 2, scratch);
  EXPECT_TRUE(whole == split);
}
