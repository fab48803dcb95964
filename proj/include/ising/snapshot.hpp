#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ising/lattice.hpp"

namespace ising {

// Snapshot file: 16-byte header {"ISNG", u32 N, u32 M, u32 reserved = 0},
// little-endian, then N*M signed bytes (-1/+1) of the full lattice, row-major.

inline constexpr std::array<char, 4> kSnapshotMagic{'I', 'S', 'N', 'G'};

namespace detail {

inline void put_u32le(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                     static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(b, 4);
}

inline std::uint32_t get_u32le(const unsigned char* b) {
  return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) | (std::uint32_t{b[3]} << 24);
}

}  // namespace detail

inline void write_snapshot(std::ostream& out, const Lattice& lat) {
  const LatticeGeometry& g = lat.geometry;
  if (g.rows > 0xFFFFFFFFu || g.cols > 0xFFFFFFFFu) throw std::invalid_argument("lattice too large for snapshot");
  out.write(kSnapshotMagic.data(), 4);
  detail::put_u32le(out, static_cast<std::uint32_t>(g.rows));
  detail::put_u32le(out, static_cast<std::uint32_t>(g.cols));
  detail::put_u32le(out, 0);
  const std::vector<Spin> full = lat.to_full();
  out.write(reinterpret_cast<const char*>(full.data()), static_cast<std::streamsize>(full.size()));
  if (!out) throw std::runtime_error("failed writing lattice snapshot");
}

inline Lattice read_snapshot(std::istream& in) {
  unsigned char header[16];
  if (!in.read(reinterpret_cast<char*>(header), 16)) throw std::runtime_error("snapshot truncated in header");
  if (std::memcmp(header, kSnapshotMagic.data(), 4) != 0) throw std::runtime_error("not a lattice snapshot (bad magic)");
  const LatticeGeometry g{detail::get_u32le(header + 4), detail::get_u32le(header + 8)};
  if (detail::get_u32le(header + 12) != 0) throw std::runtime_error("snapshot reserved field must be 0");
  g.validate();
  std::vector<Spin> full(g.sites());
  if (!in.read(reinterpret_cast<char*>(full.data()), static_cast<std::streamsize>(full.size()))) {
    throw std::runtime_error("snapshot truncated in body");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw std::runtime_error("trailing bytes after snapshot body");
  return Lattice::from_full(g, full);
}

inline void dump_lattice(const std::string& path, const Lattice& lat) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_snapshot(out, lat);
}

inline Lattice load_lattice(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_snapshot(in);
}

}  // namespace ising
