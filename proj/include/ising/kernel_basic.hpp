#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <stdexcept>

#include "ising/acceptance.hpp"
#include "ising/lattice.hpp"
#include "ising/rng.hpp"

namespace ising {

/// Anything readable as a color plane. SpinPlane is the usual model; tests wrap
/// it to trace which rows a kernel touches.
template <class P>
concept PlaneSource = requires(const P& p, std::size_t i) {
  { p.rows() } -> std::convertible_to<std::size_t>;
  { p.cols() } -> std::convertible_to<std::size_t>;
  { p(i, i) } -> std::convertible_to<int>;
};

/// Plane column holding the off-column neighbor of target cell (i, j).
constexpr std::size_t off_column(Color target, std::size_t i, std::size_t j, std::size_t cols) noexcept {
  const bool east = (target == Color::black) == (i % 2 == 1);
  if (east) return j + 1 < cols ? j + 1 : 0;
  return j > 0 ? j - 1 : cols - 1;
}

/// Sum of the four opposite-color neighbors of target cell (i, j), toroidal.
template <PlaneSource Source>
int neighbor_sum(const Source& source, Color target, std::size_t i, std::size_t j) {
  const std::size_t n = source.rows();
  const std::size_t m = source.cols();
  const std::size_t ipp = i + 1 < n ? i + 1 : 0;
  const std::size_t inn = i > 0 ? i - 1 : n - 1;
  return static_cast<int>(source(inn, j)) + static_cast<int>(source(i, j)) +
         static_cast<int>(source(ipp, j)) + static_cast<int>(source(i, off_column(target, i, j, m)));
}

/// Updates target rows [row_begin, row_end) for one color phase of `step`.
/// Reads only source rows row_begin-1 .. row_end (wrapped).
template <PlaneSource Source>
void update_rows_basic(SpinPlane& target, const Source& source, const AcceptanceTable& table,
                       std::uint64_t seed, std::uint64_t step, std::size_t row_begin,
                       std::size_t row_end) {
  const Color color = target.color();
  const std::uint64_t offset = event_offset(step, color);
  const std::size_t m = target.cols();
  for (std::size_t i = row_begin; i < row_end; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const int nn = neighbor_sum(source, color, i, j);
      const Spin s = target(i, j);
      const double u = uniform_for({seed, i * m + j, offset});
      if (u < table.probability(s, nn)) target(i, j) = static_cast<Spin>(-s);
    }
  }
}

inline void update_color(SpinPlane& target, const SpinPlane& source, const AcceptanceTable& table,
                         std::uint64_t seed, std::uint64_t step) {
  update_rows_basic(target, source, table, seed, step, 0, target.rows());
}

inline void update_color_metropolis(SpinPlane& target, const SpinPlane& source, double beta,
                                    std::uint64_t seed, std::uint64_t step) {
  update_color(target, source, AcceptanceTable(beta, UpdateRule::metropolis), seed, step);
}

inline void update_color_heatbath(SpinPlane& target, const SpinPlane& source, double beta,
                                  std::uint64_t seed, std::uint64_t step) {
  update_color(target, source, AcceptanceTable(beta, UpdateRule::heatbath), seed, step);
}

/// Black phase, then white phase against the updated black plane.
inline void sweep(Lattice& lat, const AcceptanceTable& table, std::uint64_t seed, std::uint64_t step) {
  if (step == 0) throw std::invalid_argument("sweep steps start at 1");
  update_color(lat.black, lat.white, table, seed, step);
  update_color(lat.white, lat.black, table, seed, step);
}

inline void sweep(Lattice& lat, double beta, std::uint64_t seed, std::uint64_t step, UpdateRule rule) {
  sweep(lat, AcceptanceTable(beta, rule), seed, step);
}

}  // namespace ising
