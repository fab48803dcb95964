#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ising/acceptance.hpp"
#include "ising/blocks.hpp"
#include "ising/lattice.hpp"
#include "ising/rng.hpp"

namespace ising {

/// Banded B x B matrix: ones on the diagonal and the superdiagonal.
/// (X K)[a, b] = X[a, b] + X[a, b-1] and (K^T X)[a, b] = X[a, b] + X[a-1, b].
class KernelMatrix {
 public:
  explicit KernelMatrix(std::size_t block_size) : size_(block_size), entries_(block_size * block_size, 0) {
    if (block_size < 2) throw std::invalid_argument("kernel matrix needs B >= 2, got " + std::to_string(block_size));
    for (std::size_t r = 0; r < size_; ++r) {
      entries_[r * size_ + r] = 1;
      if (r + 1 < size_) entries_[r * size_ + r + 1] = 1;
    }
  }

  std::size_t size() const noexcept { return size_; }
  std::int8_t operator()(std::size_t r, std::size_t c) const noexcept { return entries_[r * size_ + c]; }
  const std::int8_t* data() const noexcept { return entries_.data(); }

  std::size_t nonzeros() const noexcept {
    std::size_t n = 0;
    for (std::int8_t e : entries_) n += e != 0;
    return n;
  }

 private:
  std::size_t size_;
  std::vector<std::int8_t> entries_;
};

inline KernelMatrix build_kernel_matrix(std::size_t block_size) { return KernelMatrix(block_size); }

/// Products in X K that touch a nonzero of K, over a full B x B output.
inline std::size_t useful_product_count(const KernelMatrix& k) noexcept {
  return k.nonzeros() * k.size();
}

/// Fraction of the B^3 multiply-adds of one product that contribute; ~2/B.
inline double useful_fraction(const KernelMatrix& k) noexcept {
  const double b = static_cast<double>(k.size());
  return static_cast<double>(useful_product_count(k)) / (b * b * b);
}

/// One entry of a batched multiply: out (+)= op(lhs) * op(rhs), op = optional transpose.
struct MatmulTask {
  const std::int8_t* lhs = nullptr;
  bool lhs_transposed = false;
  const std::int8_t* rhs = nullptr;
  bool rhs_transposed = false;
  std::int8_t* out = nullptr;
};

/// Dense integer batched multiply of B x B matrices.
inline void batched_matmul(std::span<const MatmulTask> tasks, std::size_t n, bool accumulate) {
  for (const MatmulTask& t : tasks) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        std::int32_t acc = accumulate ? t.out[a * n + b] : 0;
        for (std::size_t r = 0; r < n; ++r) {
          const std::int32_t x = t.lhs_transposed ? t.lhs[r * n + a] : t.lhs[a * n + r];
          const std::int32_t y = t.rhs_transposed ? t.rhs[b * n + r] : t.rhs[r * n + b];
          acc += x * y;
        }
        t.out[a * n + b] = static_cast<std::int8_t>(acc);
      }
    }
  }
}

/// The two same-color blocks of each sub-lattice, in local-sum slot order.
constexpr std::array<Block, 2> target_blocks(Color c) noexcept {
  return c == Color::black ? std::array<Block, 2>{Block::s00, Block::s11}
                           : std::array<Block, 2>{Block::s10, Block::s01};
}

/// Per sub-lattice neighbor sums for the two target blocks of one color.
class LocalSums {
 public:
  LocalSums() = default;
  LocalSums(std::size_t block_size, std::size_t sub_count)
      : block_(block_size), subs_(sub_count), data_(sub_count * 2 * block_size * block_size, 0) {}

  std::size_t block_size() const noexcept { return block_; }
  std::size_t sub_count() const noexcept { return subs_; }

  std::span<std::int8_t> slot(std::size_t sub, std::size_t k) noexcept {
    return {data_.data() + (sub * 2 + k) * block_ * block_, block_ * block_};
  }
  std::span<const std::int8_t> slot(std::size_t sub, std::size_t k) const noexcept {
    return {data_.data() + (sub * 2 + k) * block_ * block_, block_ * block_};
  }
  std::int8_t at(std::size_t sub, std::size_t k, std::size_t a, std::size_t b) const noexcept {
    return slot(sub, k)[a * block_ + b];
  }
  std::int8_t& at(std::size_t sub, std::size_t k, std::size_t a, std::size_t b) noexcept {
    return slot(sub, k)[a * block_ + b];
  }

 private:
  std::size_t block_ = 0;
  std::size_t subs_ = 0;
  std::vector<std::int8_t> data_;
};

namespace detail {

/// One summand X*op(K) (left) or op(K)*Y (right) feeding a local-sum slot.
struct Summand {
  Block spins;
  bool kernel_transposed;
};

struct SlotTerms {
  Summand left;
  Summand right;
};

// black: nn(s00) = s01 K + K^T s10,  nn(s11) = s10 K^T + K s01
// white: nn(s10) = s11 K + K s00,    nn(s01) = s00 K^T + K^T s11
constexpr std::array<SlotTerms, 2> slot_terms(Color c) noexcept {
  if (c == Color::black) {
    return {SlotTerms{{Block::s01, false}, {Block::s10, true}},
            SlotTerms{{Block::s10, true}, {Block::s01, false}}};
  }
  return {SlotTerms{{Block::s11, false}, {Block::s00, false}},
          SlotTerms{{Block::s00, true}, {Block::s11, true}}};
}

}  // namespace detail

/// Sub-lattice local sums for subs [sub_begin, sub_end): one batched multiply
/// for all left summands, then one accumulating batch for all right summands.
inline void local_sums_range(const BlockLattice& blocks, const KernelMatrix& k, Color color, LocalSums& sums,
                             std::size_t sub_begin, std::size_t sub_end, std::vector<MatmulTask>& scratch) {
  const auto terms = detail::slot_terms(color);
  const std::size_t n = blocks.block_size();
  const std::int8_t* spins = blocks.data().data();
  auto block_ptr = [&](std::size_t sub, Block b) { return spins + (sub * 4 + static_cast<std::size_t>(b)) * n * n; };

  scratch.clear();
  for (std::size_t s = sub_begin; s < sub_end; ++s) {
    for (std::size_t slot = 0; slot < 2; ++slot) {
      const detail::Summand& l = terms[slot].left;
      scratch.push_back({block_ptr(s, l.spins), false, k.data(), l.kernel_transposed, sums.slot(s, slot).data()});
    }
  }
  batched_matmul(scratch, n, false);

  scratch.clear();
  for (std::size_t s = sub_begin; s < sub_end; ++s) {
    for (std::size_t slot = 0; slot < 2; ++slot) {
      const detail::Summand& r = terms[slot].right;
      scratch.push_back({k.data(), r.kernel_transposed, block_ptr(s, r.spins), false, sums.slot(s, slot).data()});
    }
  }
  batched_matmul(scratch, n, true);
}

inline LocalSums local_sums(const BlockLattice& blocks, Color color) {
  LocalSums sums(blocks.block_size(), blocks.sub_count());
  std::vector<MatmulTask> scratch;
  local_sums_range(blocks, KernelMatrix(blocks.block_size()), color, sums, 0, blocks.sub_count(), scratch);
  return sums;
}

/// Adds the single cross-sub-lattice neighbor missing from each edge entry.
/// Reads only source-color blocks of the four adjacent sub-lattices.
inline void boundary_fixup_range(LocalSums& sums, const BlockLattice& blocks, Color color, std::size_t sub_begin,
                                 std::size_t sub_end) {
  const std::size_t n = blocks.block_size();
  const std::size_t last = n - 1;
  const std::size_t rows = blocks.sub_rows();
  const std::size_t cols = blocks.sub_cols();
  for (std::size_t s = sub_begin; s < sub_end; ++s) {
    const std::size_t sr = s / cols;
    const std::size_t sc = s % cols;
    const std::size_t west = blocks.sub_index(sr, sc > 0 ? sc - 1 : cols - 1);
    const std::size_t east = blocks.sub_index(sr, sc + 1 < cols ? sc + 1 : 0);
    const std::size_t north = blocks.sub_index(sr > 0 ? sr - 1 : rows - 1, sc);
    const std::size_t south = blocks.sub_index(sr + 1 < rows ? sr + 1 : 0, sc);
    for (std::size_t x = 0; x < n; ++x) {
      if (color == Color::black) {
        sums.at(s, 0, x, 0) += blocks.at(west, Block::s01, x, last);
        sums.at(s, 0, 0, x) += blocks.at(north, Block::s10, last, x);
        sums.at(s, 1, x, last) += blocks.at(east, Block::s10, x, 0);
        sums.at(s, 1, last, x) += blocks.at(south, Block::s01, 0, x);
      } else {
        sums.at(s, 0, x, 0) += blocks.at(west, Block::s11, x, last);
        sums.at(s, 0, last, x) += blocks.at(south, Block::s00, 0, x);
        sums.at(s, 1, x, last) += blocks.at(east, Block::s00, x, 0);
        sums.at(s, 1, 0, x) += blocks.at(north, Block::s11, last, x);
      }
    }
  }
}

inline void boundary_fixup(LocalSums& sums, const BlockLattice& blocks, Color color) {
  boundary_fixup_range(sums, blocks, color, 0, blocks.sub_count());
}

/// Flips target-color entries of subs [sub_begin, sub_end) from completed sums.
/// Each site draws from its color-plane address, same as the other kernels.
inline void update_from_sums_range(BlockLattice& blocks, const LocalSums& sums, Color color,
                                   const AcceptanceTable& table, std::uint64_t seed, std::uint64_t step,
                                   std::size_t sub_begin, std::size_t sub_end) {
  const std::size_t n = blocks.block_size();
  const std::size_t plane_cols = blocks.geometry().plane_cols();
  const std::uint64_t offset = event_offset(step, color);
  const auto targets = target_blocks(color);
  for (std::size_t s = sub_begin; s < sub_end; ++s) {
    for (std::size_t slot = 0; slot < 2; ++slot) {
      const Block b = targets[slot];
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t c = 0; c < n; ++c) {
          const SiteCoord site = blocks.site(s, b, a, c);
          Spin& spin = blocks.at(s, b, a, c);
          const double u = uniform_for({seed, site.row * plane_cols + site.col / 2, offset});
          if (u < table.probability(spin, sums.at(s, slot, a, c))) spin = static_cast<Spin>(-spin);
        }
      }
    }
  }
}

inline void update_from_sums(BlockLattice& blocks, const LocalSums& sums, Color color, const AcceptanceTable& table,
                             std::uint64_t seed, std::uint64_t step) {
  update_from_sums_range(blocks, sums, color, table, seed, step, 0, blocks.sub_count());
}

/// Reusable buffers for the gemm path: kernel matrix, sums, batch lists.
struct GemmWorkspace {
  KernelMatrix kernel;
  LocalSums sums;

  explicit GemmWorkspace(const BlockLattice& blocks)
      : kernel(blocks.block_size()), sums(blocks.block_size(), blocks.sub_count()) {}
};

/// All three stages for one color over subs [sub_begin, sub_end).
inline void update_color_gemm_range(BlockLattice& blocks, GemmWorkspace& ws, Color color, const AcceptanceTable& table,
                                    std::uint64_t seed, std::uint64_t step, std::size_t sub_begin,
                                    std::size_t sub_end, std::vector<MatmulTask>& scratch) {
  local_sums_range(blocks, ws.kernel, color, ws.sums, sub_begin, sub_end, scratch);
  boundary_fixup_range(ws.sums, blocks, color, sub_begin, sub_end);
  update_from_sums_range(blocks, ws.sums, color, table, seed, step, sub_begin, sub_end);
}

inline void update_color_gemm(BlockLattice& blocks, GemmWorkspace& ws, Color color, const AcceptanceTable& table,
                              std::uint64_t seed, std::uint64_t step) {
  std::vector<MatmulTask> scratch;
  update_color_gemm_range(blocks, ws, color, table, seed, step, 0, blocks.sub_count(), scratch);
}

inline void sweep_gemm(BlockLattice& blocks, GemmWorkspace& ws, const AcceptanceTable& table, std::uint64_t seed,
                       std::uint64_t step) {
  if (step == 0) throw std::invalid_argument("sweep steps start at 1");
  update_color_gemm(blocks, ws, Color::black, table, seed, step);
  update_color_gemm(blocks, ws, Color::white, table, seed, step);
}

}  // namespace ising
