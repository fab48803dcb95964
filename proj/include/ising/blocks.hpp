#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ising/lattice.hpp"

namespace ising {

/// Parity block inside a 2B x 2B sub-lattice: digit one is the row parity,
/// digit two the column parity. s00 and s11 are black, s01 and s10 white.
enum class Block : std::uint8_t { s00 = 0, s01 = 1, s10 = 2, s11 = 3 };

constexpr std::size_t row_parity(Block b) noexcept { return static_cast<std::size_t>(b) / 2; }
constexpr std::size_t col_parity(Block b) noexcept { return static_cast<std::size_t>(b) % 2; }
constexpr Color block_color(Block b) noexcept {
  return (row_parity(b) + col_parity(b)) % 2 == 0 ? Color::black : Color::white;
}

/// The lattice regrouped into sub-lattices of four B x B parity blocks.
/// block(s, Block::sXY)[a, b] = spin(2B*sr + 2a + X, 2B*sc + 2b + Y).
class BlockLattice {
 public:
  BlockLattice() = default;
  BlockLattice(const LatticeGeometry& g, std::size_t block_size)
      : geometry_(g),
        block_(block_size),
        sub_rows_(g.rows / (2 * block_size)),
        sub_cols_(g.cols / (2 * block_size)),
        data_(g.sites(), 1) {
    require_block_alignment(g, block_size);
  }

  const LatticeGeometry& geometry() const noexcept { return geometry_; }
  std::size_t block_size() const noexcept { return block_; }
  std::size_t sub_rows() const noexcept { return sub_rows_; }
  std::size_t sub_cols() const noexcept { return sub_cols_; }
  std::size_t sub_count() const noexcept { return sub_rows_ * sub_cols_; }
  std::size_t sub_index(std::size_t sr, std::size_t sc) const noexcept { return sr * sub_cols_ + sc; }

  std::span<Spin> block(std::size_t sub, Block b) noexcept {
    return {data_.data() + (sub * 4 + static_cast<std::size_t>(b)) * block_ * block_, block_ * block_};
  }
  std::span<const Spin> block(std::size_t sub, Block b) const noexcept {
    return {data_.data() + (sub * 4 + static_cast<std::size_t>(b)) * block_ * block_, block_ * block_};
  }

  Spin at(std::size_t sub, Block b, std::size_t a, std::size_t c) const noexcept { return block(sub, b)[a * block_ + c]; }
  Spin& at(std::size_t sub, Block b, std::size_t a, std::size_t c) noexcept { return block(sub, b)[a * block_ + c]; }

  /// Full-lattice coordinates of block entry (a, c).
  SiteCoord site(std::size_t sub, Block b, std::size_t a, std::size_t c) const noexcept {
    const std::size_t sr = sub / sub_cols_;
    const std::size_t sc = sub % sub_cols_;
    return {2 * block_ * sr + 2 * a + row_parity(b), 2 * block_ * sc + 2 * c + col_parity(b)};
  }

  std::span<const Spin> data() const noexcept { return data_; }

  friend bool operator==(const BlockLattice&, const BlockLattice&) = default;

 private:
  LatticeGeometry geometry_;
  std::size_t block_ = 0;
  std::size_t sub_rows_ = 0;
  std::size_t sub_cols_ = 0;
  std::vector<Spin> data_;
};

inline constexpr std::array<Block, 4> kAllBlocks{Block::s00, Block::s01, Block::s10, Block::s11};

inline BlockLattice to_blocks(const Lattice& lat, std::size_t block_size) {
  BlockLattice out(lat.geometry, block_size);
  for (std::size_t s = 0; s < out.sub_count(); ++s) {
    for (Block b : kAllBlocks) {
      for (std::size_t a = 0; a < block_size; ++a) {
        for (std::size_t c = 0; c < block_size; ++c) {
          const SiteCoord site = out.site(s, b, a, c);
          out.at(s, b, a, c) = lat.spin(site.row, site.col);
        }
      }
    }
  }
  return out;
}

inline Lattice from_blocks(const BlockLattice& blocks) {
  Lattice out(blocks.geometry());
  const std::size_t bs = blocks.block_size();
  for (std::size_t s = 0; s < blocks.sub_count(); ++s) {
    for (Block b : kAllBlocks) {
      for (std::size_t a = 0; a < bs; ++a) {
        for (std::size_t c = 0; c < bs; ++c) {
          const SiteCoord site = blocks.site(s, b, a, c);
          out.set_spin(site.row, site.col, blocks.at(s, b, a, c));
        }
      }
    }
  }
  return out;
}

}  // namespace ising
