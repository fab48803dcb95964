#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ising/kernel_basic.hpp"
#include "ising/lattice.hpp"

namespace ising {

/// Critical temperature of the infinite 2D lattice, in units of J.
inline constexpr double kCriticalTemperature = 2.269185;

/// Per-sweep measurements taken on the synchronized lattice.
struct ObservableSeries {
  std::vector<std::uint64_t> sweeps;
  std::vector<double> magnetization;
  std::vector<double> energy;
  std::vector<std::uint64_t> checksums;

  std::size_t size() const noexcept { return sweeps.size(); }
  friend bool operator==(const ObservableSeries&, const ObservableSeries&) = default;
};

inline double magnetization(const Lattice& lat) {
  std::int64_t total = 0;
  for (const SpinPlane* p : {&lat.black, &lat.white}) {
    for (Spin s : p->cells()) total += s;
  }
  return static_cast<double>(total) / static_cast<double>(lat.geometry.sites());
}

/// H / (N M) with J = 1, every bond counted once. Summing spin * neighbor_sum
/// over the black plane touches each bond exactly once.
inline double energy_per_site(const Lattice& lat) {
  std::int64_t bonds = 0;
  const SpinPlane& black = lat.black;
  for (std::size_t i = 0; i < black.rows(); ++i) {
    for (std::size_t j = 0; j < black.cols(); ++j) {
      bonds += static_cast<std::int64_t>(black(i, j)) * neighbor_sum(lat.white, Color::black, i, j);
    }
  }
  return -static_cast<double>(bonds) / static_cast<double>(lat.geometry.sites());
}

/// Spontaneous magnetization of the infinite lattice; 0 at and above T_c.
inline double onsager_magnetization(double temperature) {
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("temperature must be positive, got " + std::to_string(temperature));
  }
  if (temperature >= kCriticalTemperature) return 0.0;
  const double s = std::sinh(2.0 / temperature);
  return std::pow(1.0 - std::pow(s, -4.0), 0.125);
}

enum class BinderVariant { paper_literal, conventional };

inline const char* to_string(BinderVariant v) noexcept {
  return v == BinderVariant::paper_literal ? "paper_literal" : "conventional";
}

struct BinderEstimate {
  std::size_t lattice_size = 0;
  double value = 0.0;
  BinderVariant variant = BinderVariant::paper_literal;
  std::size_t samples = 0;
};

/// paper_literal: 1 - <m^4> / <m^2>^2. conventional: 1 - <m^4> / (3 <m^2>^2).
inline BinderEstimate binder_cumulant(std::span<const double> m, BinderVariant variant = BinderVariant::paper_literal,
                                      std::size_t lattice_size = 0) {
  if (m.size() < 2) throw std::invalid_argument("binder cumulant needs at least 2 samples");
  double m2 = 0.0;
  double m4 = 0.0;
  for (double x : m) {
    const double x2 = x * x;
    m2 += x2;
    m4 += x2 * x2;
  }
  if (m2 == 0.0) throw std::invalid_argument("binder cumulant undefined for all-zero samples");
  const double n = static_cast<double>(m.size());
  m2 /= n;
  m4 /= n;
  const double ratio = m4 / (m2 * m2);
  const double u = variant == BinderVariant::paper_literal ? 1.0 - ratio : 1.0 - ratio / 3.0;
  return {lattice_size, u, variant, m.size()};
}

struct ExactAverages {
  double abs_magnetization = 0.0;
  double energy = 0.0;
  double m2 = 0.0;
  double m4 = 0.0;
  double magnetization = 0.0;
};

inline constexpr std::size_t kMaxExactSpins = 20;

/// Boltzmann averages over all 2^(N M) states of the torus. Each state is
/// summed together with its global flip, so the signed magnetization is 0 exactly.
inline ExactAverages exact_averages(std::size_t rows, std::size_t cols, double beta) {
  if (rows < 2 || cols < 2) throw std::invalid_argument("exact enumeration needs at least 2x2");
  const std::size_t n = rows * cols;
  if (n > kMaxExactSpins) {
    throw std::invalid_argument("exact enumeration capped at " + std::to_string(kMaxExactSpins) + " spins, got " +
                                std::to_string(n));
  }
  const double sites = static_cast<double>(n);
  // Ground-state energy -2NM; weights exp(-beta (E - E0)) stay <= 1.
  const double e0 = -2.0 * sites;
  double z = 0.0;
  double sum_abs = 0.0;
  double sum_e = 0.0;
  double sum_m2 = 0.0;
  double sum_m4 = 0.0;
  double sum_m = 0.0;
  std::vector<int> s(n);
  const std::uint64_t half = std::uint64_t{1} << (n - 1);
  for (std::uint64_t state = 0; state < half; ++state) {
    int total = 0;
    for (std::size_t k = 0; k < n; ++k) {
      s[k] = (state >> k) & 1 ? 1 : -1;
      total += s[k];
    }
    int bonds = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        const int here = s[i * cols + j];
        bonds += here * (s[i * cols + (j + 1) % cols] + s[((i + 1) % rows) * cols + j]);
      }
    }
    const double energy = -static_cast<double>(bonds);
    const double w = std::exp(-beta * (energy - e0));
    const double m = total / sites;
    const double m2 = m * m;
    // The flipped state has the same weight, energy and even moments.
    z += 2.0 * w;
    sum_abs += 2.0 * w * std::abs(m);
    sum_e += 2.0 * w * energy / sites;
    sum_m2 += 2.0 * w * m2;
    sum_m4 += 2.0 * w * m2 * m2;
    sum_m += w * m + w * -m;
  }
  return {sum_abs / z, sum_e / z, sum_m2 / z, sum_m4 / z, sum_m / z};
}

inline double flip_rate(const LatticeGeometry& g, std::uint64_t sweeps, double elapsed_ns) {
  if (!(elapsed_ns > 0.0)) throw std::invalid_argument("elapsed time must be positive");
  return static_cast<double>(g.sites()) * static_cast<double>(sweeps) / elapsed_ns;
}

struct MeanError {
  double mean = 0.0;
  double error = 0.0;
};

/// Mean and batch-means standard error. Trailing samples that do not fill a
/// batch are dropped from the error estimate but kept in the mean.
inline MeanError batch_means(std::span<const double> x, std::size_t batches = 32) {
  if (x.empty()) throw std::invalid_argument("batch means of an empty series");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  if (batches < 2 || x.size() < batches) return {mean, 0.0};
  const std::size_t per = x.size() / batches;
  std::vector<double> bm(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t k = 0; k < per; ++k) bm[b] += x[b * per + k];
    bm[b] /= static_cast<double>(per);
  }
  double bmean = 0.0;
  for (double v : bm) bmean += v;
  bmean /= static_cast<double>(batches);
  double var = 0.0;
  for (double v : bm) var += (v - bmean) * (v - bmean);
  var /= static_cast<double>(batches - 1);
  return {mean, std::sqrt(var / static_cast<double>(batches))};
}

}  // namespace ising
