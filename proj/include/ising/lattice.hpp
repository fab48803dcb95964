#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ising/rng.hpp"

namespace ising {

using Spin = std::int8_t;

/// Checkerboard color. A site (i, j) of the full lattice is black iff i + j is even.
enum class Color : std::uint8_t { black = 0, white = 1 };

constexpr Color opposite(Color c) noexcept { return c == Color::black ? Color::white : Color::black; }
constexpr std::uint64_t color_index(Color c) noexcept { return static_cast<std::uint64_t>(c); }

inline const char* to_string(Color c) noexcept { return c == Color::black ? "black" : "white"; }

/// RNG event offset for one color phase of a sweep. Step 0 is reserved for initialization.
constexpr std::uint64_t event_offset(std::uint64_t step, Color c) noexcept {
  return 2 * step + color_index(c);
}

/// Full toroidal lattice extent: `rows` = N, `cols` = M.
struct LatticeGeometry {
  std::size_t rows = 0;
  std::size_t cols = 0;

  constexpr std::size_t plane_cols() const noexcept { return cols / 2; }
  constexpr std::size_t sites() const noexcept { return rows * cols; }
  constexpr std::size_t plane_sites() const noexcept { return rows * plane_cols(); }

  void validate() const {
    if (rows < 2 || cols < 2) {
      throw std::invalid_argument("lattice dimensions must be at least 2x2, got " +
                                  std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (rows % 2 != 0 || cols % 2 != 0) {
      throw std::invalid_argument("lattice dimensions must be even, got " + std::to_string(rows) +
                                  "x" + std::to_string(cols));
    }
  }

  friend constexpr bool operator==(const LatticeGeometry&, const LatticeGeometry&) = default;
};

inline constexpr std::size_t kLanesPerWord = 16;

inline void require_packed_alignment(const LatticeGeometry& g) {
  g.validate();
  if (g.plane_cols() % kLanesPerWord != 0) {
    throw std::invalid_argument("packed kernel needs cols/2 divisible by 16, got cols=" +
                                std::to_string(g.cols));
  }
}

inline void require_block_alignment(const LatticeGeometry& g, std::size_t block) {
  g.validate();
  if (block < 2) throw std::invalid_argument("block size must be >= 2");
  if (g.rows % (2 * block) != 0 || g.cols % (2 * block) != 0) {
    throw std::invalid_argument("gemm kernel needs 2*B (" + std::to_string(2 * block) +
                                ") to divide both " + std::to_string(g.rows) + " and " +
                                std::to_string(g.cols));
  }
}

struct PlaneCoord {
  Color color = Color::black;
  std::size_t row = 0;
  std::size_t col = 0;

  friend constexpr bool operator==(const PlaneCoord&, const PlaneCoord&) = default;
};

struct SiteCoord {
  std::size_t row = 0;
  std::size_t col = 0;

  friend constexpr bool operator==(const SiteCoord&, const SiteCoord&) = default;
};

inline PlaneCoord full_to_plane(const LatticeGeometry& g, std::size_t i, std::size_t jf) {
  if (i >= g.rows || jf >= g.cols) {
    throw std::out_of_range("site (" + std::to_string(i) + ", " + std::to_string(jf) +
                            ") outside " + std::to_string(g.rows) + "x" + std::to_string(g.cols));
  }
  return {(i + jf) % 2 == 0 ? Color::black : Color::white, i, jf / 2};
}

inline SiteCoord plane_to_full(const LatticeGeometry& g, const PlaneCoord& p) {
  if (p.row >= g.rows || p.col >= g.plane_cols()) {
    throw std::out_of_range("plane cell outside geometry");
  }
  const std::size_t shift = p.color == Color::black ? p.row % 2 : (p.row + 1) % 2;
  return {p.row, 2 * p.col + shift};
}

/// One checkerboard color compacted along rows: rows x (cols/2) signed spins.
class SpinPlane {
 public:
  SpinPlane() = default;
  SpinPlane(Color color, std::size_t rows, std::size_t cols, Spin fill = 1)
      : color_(color), rows_(rows), cols_(cols), cells_(rows * cols, fill) {}

  Color color() const noexcept { return color_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  Spin operator()(std::size_t i, std::size_t j) const noexcept { return cells_[i * cols_ + j]; }
  Spin& operator()(std::size_t i, std::size_t j) noexcept { return cells_[i * cols_ + j]; }

  std::span<const Spin> row(std::size_t i) const noexcept { return {cells_.data() + i * cols_, cols_}; }
  std::span<Spin> row(std::size_t i) noexcept { return {cells_.data() + i * cols_, cols_}; }

  std::span<const Spin> cells() const noexcept { return cells_; }
  std::span<Spin> cells() noexcept { return cells_; }

  bool valid_spins() const noexcept {
    for (Spin s : cells_) {
      if (s != 1 && s != -1) return false;
    }
    return true;
  }

  friend bool operator==(const SpinPlane&, const SpinPlane&) = default;

 private:
  Color color_ = Color::black;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Spin> cells_;
};

/// Both color planes of one toroidal lattice.
struct Lattice {
  LatticeGeometry geometry;
  SpinPlane black;
  SpinPlane white;

  Lattice() = default;
  explicit Lattice(const LatticeGeometry& g, Spin fill = 1)
      : geometry(g),
        black(Color::black, g.rows, g.plane_cols(), fill),
        white(Color::white, g.rows, g.plane_cols(), fill) {
    g.validate();
  }

  SpinPlane& plane(Color c) noexcept { return c == Color::black ? black : white; }
  const SpinPlane& plane(Color c) const noexcept { return c == Color::black ? black : white; }

  Spin spin(std::size_t i, std::size_t jf) const {
    const PlaneCoord p = full_to_plane(geometry, i, jf);
    return plane(p.color)(p.row, p.col);
  }
  void set_spin(std::size_t i, std::size_t jf, Spin s) {
    const PlaneCoord p = full_to_plane(geometry, i, jf);
    plane(p.color)(p.row, p.col) = s;
  }

  /// Row-major full lattice.
  std::vector<Spin> to_full() const {
    std::vector<Spin> out(geometry.sites());
    for (std::size_t i = 0; i < geometry.rows; ++i) {
      for (std::size_t jf = 0; jf < geometry.cols; ++jf) out[i * geometry.cols + jf] = spin(i, jf);
    }
    return out;
  }

  static Lattice from_full(const LatticeGeometry& g, std::span<const Spin> full) {
    if (full.size() != g.sites()) throw std::invalid_argument("full lattice size mismatch");
    Lattice lat(g);
    for (std::size_t i = 0; i < g.rows; ++i) {
      for (std::size_t jf = 0; jf < g.cols; ++jf) {
        const Spin s = full[i * g.cols + jf];
        if (s != 1 && s != -1) throw std::invalid_argument("spin values must be -1 or +1");
        lat.set_spin(i, jf, s);
      }
    }
    return lat;
  }

  friend bool operator==(const Lattice&, const Lattice&) = default;
};

enum class InitMode { hot, cold };

/// Cold start is all +1. Hot start draws each spin from the step-0 RNG events
/// (offset 0 for black, 1 for white) so it never overlaps sweep draws.
inline Lattice init_lattice(const LatticeGeometry& g, std::uint64_t seed, InitMode mode) {
  Lattice lat(g);
  if (mode == InitMode::cold) return lat;
  for (Color c : {Color::black, Color::white}) {
    SpinPlane& p = lat.plane(c);
    const std::uint64_t offset = event_offset(0, c);
    for (std::size_t i = 0; i < p.rows(); ++i) {
      for (std::size_t j = 0; j < p.cols(); ++j) {
        const double u = uniform_for({seed, i * p.cols() + j, offset});
        p(i, j) = u < 0.5 ? Spin{1} : Spin{-1};
      }
    }
  }
  return lat;
}

/// FNV-1a over both planes; cheap trajectory fingerprint.
inline std::uint64_t checksum(const Lattice& lat) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const SpinPlane* p : {&lat.black, &lat.white}) {
    for (Spin s : p->cells()) {
      h ^= static_cast<std::uint8_t>(s);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace ising
