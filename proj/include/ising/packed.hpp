#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ising/lattice.hpp"

namespace ising {

/// Nibble with value 1 in every lane.
inline constexpr std::uint64_t kLaneOnes = 0x1111111111111111ULL;

/// A color plane with 4 bits per spin: lane k of a word occupies bits
/// [4k, 4k + 4) and holds (spin + 1) / 2. Lane 0 is the lowest plane column.
class PackedPlane {
 public:
  PackedPlane() = default;
  PackedPlane(Color color, std::size_t rows, std::size_t word_cols, std::uint64_t fill = kLaneOnes)
      : color_(color), rows_(rows), word_cols_(word_cols), words_(rows * word_cols, fill) {}

  Color color() const noexcept { return color_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t word_cols() const noexcept { return word_cols_; }
  /// Plane columns (spins per row).
  std::size_t cols() const noexcept { return word_cols_ * kLanesPerWord; }

  std::uint64_t word(std::size_t i, std::size_t wj) const noexcept { return words_[i * word_cols_ + wj]; }
  std::uint64_t& word(std::size_t i, std::size_t wj) noexcept { return words_[i * word_cols_ + wj]; }

  unsigned lane(std::size_t i, std::size_t col) const noexcept {
    return static_cast<unsigned>((word(i, col / kLanesPerWord) >> (4 * (col % kLanesPerWord))) & 0xF);
  }
  /// Spin view so a PackedPlane can stand in wherever a plane source is read.
  int operator()(std::size_t i, std::size_t col) const noexcept { return 2 * static_cast<int>(lane(i, col)) - 1; }

  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::span<std::uint64_t> words() noexcept { return words_; }

  /// Every lane is 0 or 1.
  bool lanes_valid() const noexcept {
    for (std::uint64_t w : words_) {
      if ((w & ~kLaneOnes) != 0) return false;
    }
    return true;
  }

  friend bool operator==(const PackedPlane&, const PackedPlane&) = default;

 private:
  Color color_ = Color::black;
  std::size_t rows_ = 0;
  std::size_t word_cols_ = 0;
  std::vector<std::uint64_t> words_;
};

inline PackedPlane pack(const SpinPlane& plane) {
  if (plane.cols() % kLanesPerWord != 0) {
    throw std::invalid_argument("plane width " + std::to_string(plane.cols()) +
                                " is not a multiple of 16");
  }
  PackedPlane out(plane.color(), plane.rows(), plane.cols() / kLanesPerWord, 0);
  for (std::size_t i = 0; i < plane.rows(); ++i) {
    for (std::size_t wj = 0; wj < out.word_cols(); ++wj) {
      std::uint64_t w = 0;
      for (std::size_t k = 0; k < kLanesPerWord; ++k) {
        const Spin s = plane(i, wj * kLanesPerWord + k);
        w |= static_cast<std::uint64_t>((s + 1) / 2) << (4 * k);
      }
      out.word(i, wj) = w;
    }
  }
  return out;
}

inline SpinPlane unpack(const PackedPlane& packed) {
  SpinPlane out(packed.color(), packed.rows(), packed.cols());
  for (std::size_t i = 0; i < packed.rows(); ++i) {
    for (std::size_t j = 0; j < packed.cols(); ++j) out(i, j) = static_cast<Spin>(packed(i, j));
  }
  return out;
}

struct PackedLattice {
  LatticeGeometry geometry;
  PackedPlane black;
  PackedPlane white;

  PackedPlane& plane(Color c) noexcept { return c == Color::black ? black : white; }
  const PackedPlane& plane(Color c) const noexcept { return c == Color::black ? black : white; }

  friend bool operator==(const PackedLattice&, const PackedLattice&) = default;
};

inline PackedLattice pack(const Lattice& lat) {
  require_packed_alignment(lat.geometry);
  return {lat.geometry, pack(lat.black), pack(lat.white)};
}

inline Lattice unpack(const PackedLattice& packed) {
  Lattice out(packed.geometry);
  out.black = unpack(packed.black);
  out.white = unpack(packed.white);
  return out;
}

}  // namespace ising
