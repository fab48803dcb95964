#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ising/acceptance.hpp"
#include "ising/lattice.hpp"
#include "ising/observables.hpp"

namespace ising {

inline constexpr const char* kVersion = "0.1.0";

enum class KernelKind { basic, packed, gemm };
enum class RunMode { run, bench, validate, crosscheck };
enum class OutputFormat { csv, json };
enum class ScalingMode { strong, weak };

inline const char* to_string(KernelKind k) noexcept {
  switch (k) {
    case KernelKind::basic: return "basic";
    case KernelKind::packed: return "packed";
    case KernelKind::gemm: return "gemm";
  }
  return "?";
}

inline const char* to_string(RunMode m) noexcept {
  switch (m) {
    case RunMode::run: return "run";
    case RunMode::bench: return "bench";
    case RunMode::validate: return "validate";
    case RunMode::crosscheck: return "crosscheck";
  }
  return "?";
}

inline const char* to_string(OutputFormat f) noexcept { return f == OutputFormat::csv ? "csv" : "json"; }
inline const char* to_string(ScalingMode s) noexcept { return s == ScalingMode::strong ? "strong" : "weak"; }
inline const char* to_string(InitMode m) noexcept { return m == InitMode::hot ? "hot" : "cold"; }

/// Everything one run (or one bench/validate campaign) needs. `beta` is J/T with J = 1.
struct SimConfig {
  std::size_t rows = 64;  // lx
  std::size_t cols = 64;  // ly
  double beta = 0.0;
  std::optional<double> temperature;  // set when the user gave --temp
  std::uint64_t sweeps = 128;
  std::uint64_t warmup = 0;
  std::uint64_t measure_every = 1;  // 0 disables sampling
  std::uint64_t seed = 1;
  KernelKind kernel = KernelKind::basic;
  UpdateRule rule = UpdateRule::metropolis;
  std::size_t workers = 1;
  std::size_t block_size = 8;
  InitMode init = InitMode::hot;
  RunMode mode = RunMode::run;
  OutputFormat format = OutputFormat::csv;
  std::string output;  // empty = stdout
  std::string dump_path;
  std::string load_path;

  // bench
  std::vector<KernelKind> bench_kernels{KernelKind::basic, KernelKind::packed};
  std::vector<std::size_t> bench_workers{1};
  ScalingMode scaling = ScalingMode::strong;

  // validate
  std::vector<double> temperatures{1.5, 2.0, 2.1, kCriticalTemperature, 2.5};
  std::vector<std::size_t> binder_sizes;
  std::string binder_output;
  BinderVariant binder_variant = BinderVariant::paper_literal;

  LatticeGeometry geometry() const noexcept { return {rows, cols}; }
};

/// Alignment rules of `kernel` for a lattice of geometry `g`.
inline void require_kernel_alignment(KernelKind kernel, const LatticeGeometry& g, std::size_t block_size) {
  g.validate();
  if (kernel == KernelKind::packed) require_packed_alignment(g);
  if (kernel == KernelKind::gemm) require_block_alignment(g, block_size);
}

inline bool kernel_supports(KernelKind kernel, const LatticeGeometry& g, std::size_t block_size) noexcept {
  try {
    require_kernel_alignment(kernel, g, block_size);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

inline std::optional<KernelKind> parse_kernel(std::string_view s) {
  if (s == "basic") return KernelKind::basic;
  if (s == "packed") return KernelKind::packed;
  if (s == "gemm") return KernelKind::gemm;
  return std::nullopt;
}

}  // namespace ising
