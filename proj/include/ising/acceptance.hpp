#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "ising/lattice.hpp"

namespace ising {

enum class UpdateRule { metropolis, heatbath };

inline const char* to_string(UpdateRule r) noexcept {
  return r == UpdateRule::metropolis ? "metropolis" : "heatbath";
}

/// Flip probabilities for every (spin, neighbor sum) pair at one inverse
/// temperature, with J = 1 and dE = 2 * spin * nn_sum.
///
/// Every kernel decides a flip as `uniform < probability(spin, nn_sum)`. The
/// integer form `raw_draw < threshold(spin, nn_sum)` is the same predicate:
/// uniform = raw * 2^-32 exactly, and for integer raw, raw < t <=> raw < ceil(t).
class AcceptanceTable {
 public:
  static constexpr std::size_t kSums = 5;

  AcceptanceTable(double beta, UpdateRule rule) : beta_(beta), rule_(rule) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
      throw std::invalid_argument("beta must be finite and >= 0, got " + std::to_string(beta));
    }
    for (std::size_t s = 0; s < 2; ++s) {
      const int spin = static_cast<int>(2 * s) - 1;
      for (std::size_t k = 0; k < kSums; ++k) {
        const int nn = static_cast<int>(2 * k) - 4;
        const double boltz = std::exp(-2.0 * beta * nn * spin);
        double p = rule == UpdateRule::metropolis ? boltz : boltz / (boltz + 1.0);
        if (p > 1.0) p = 1.0;
        prob_[s * kSums + k] = p;
        thresh_[s * kSums + k] = static_cast<std::uint64_t>(std::ceil(std::ldexp(p, 32)));
      }
    }
  }

  double beta() const noexcept { return beta_; }
  UpdateRule rule() const noexcept { return rule_; }

  static constexpr std::size_t index(int spin, int nn_sum) noexcept {
    return static_cast<std::size_t>((spin + 1) / 2) * kSums + static_cast<std::size_t>((nn_sum + 4) / 2);
  }

  double probability(int spin, int nn_sum) const noexcept { return prob_[index(spin, nn_sum)]; }
  std::uint64_t threshold(int spin, int nn_sum) const noexcept { return thresh_[index(spin, nn_sum)]; }

  /// Same tables indexed by the packed 0/1 encoding: lane value and lane sum in [0, 4].
  double probability_by_lane(unsigned lane, unsigned lane_sum) const noexcept {
    return prob_[lane * kSums + lane_sum];
  }
  std::uint64_t threshold_by_lane(unsigned lane, unsigned lane_sum) const noexcept {
    return thresh_[lane * kSums + lane_sum];
  }
  const std::array<std::uint64_t, 2 * kSums>& thresholds() const noexcept { return thresh_; }

 private:
  double beta_;
  UpdateRule rule_;
  std::array<double, 2 * kSums> prob_{};
  std::array<std::uint64_t, 2 * kSums> thresh_{};
};

}  // namespace ising
