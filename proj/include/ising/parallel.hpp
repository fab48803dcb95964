#pragma once

#include <barrier>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ising/acceptance.hpp"
#include "ising/blocks.hpp"
#include "ising/config.hpp"
#include "ising/kernel_basic.hpp"
#include "ising/kernel_gemm.hpp"
#include "ising/kernel_packed.hpp"
#include "ising/lattice.hpp"
#include "ising/observables.hpp"
#include "ising/packed.hpp"

namespace ising {

struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  friend constexpr bool operator==(const RowRange&, const RowRange&) = default;
};

/// Contiguous horizontal slabs, one per worker. Heights differ by at most one.
struct SlabPartition {
  std::size_t rows = 0;
  std::vector<RowRange> slabs;

  std::size_t workers() const noexcept { return slabs.size(); }
  /// Rows read from the neighboring slabs (toroidal).
  std::size_t north_halo(std::size_t k) const noexcept { return (slabs[k].begin + rows - 1) % rows; }
  std::size_t south_halo(std::size_t k) const noexcept { return slabs[k].end % rows; }
};

inline SlabPartition partition_range(std::size_t count, std::size_t workers, std::size_t min_height) {
  if (workers < 1) throw std::invalid_argument("worker count must be >= 1");
  if (count < min_height * workers) {
    throw std::invalid_argument("cannot split " + std::to_string(count) + " rows across " + std::to_string(workers) +
                                " workers with at least " + std::to_string(min_height) + " rows each");
  }
  SlabPartition p{count, {}};
  const std::size_t base = count / workers;
  const std::size_t extra = count % workers;
  std::size_t at = 0;
  for (std::size_t k = 0; k < workers; ++k) {
    const std::size_t h = base + (k < extra ? 1 : 0);
    p.slabs.push_back({at, at + h});
    at += h;
  }
  return p;
}

inline SlabPartition partition_slabs(std::size_t rows, std::size_t workers) { return partition_range(rows, workers, 2); }

/// Long-lived workers released together for one phase at a time. The calling
/// thread acts as worker 0, so run() returns only after every worker finished.
class PhasePool {
 public:
  explicit PhasePool(std::size_t workers) : start_(static_cast<std::ptrdiff_t>(workers)),
                                            done_(static_cast<std::ptrdiff_t>(workers)),
                                            errors_(workers) {
    if (workers < 1) throw std::invalid_argument("worker count must be >= 1");
    for (std::size_t k = 1; k < workers; ++k) {
      threads_.emplace_back([this, k] { loop(k); });
    }
  }

  PhasePool(const PhasePool&) = delete;
  PhasePool& operator=(const PhasePool&) = delete;

  ~PhasePool() {
    if (!threads_.empty()) {
      stop_ = true;
      start_.arrive_and_wait();
    }
  }

  std::size_t size() const noexcept { return errors_.size(); }

  void run(const std::function<void(std::size_t)>& task) {
    task_ = &task;
    if (!threads_.empty()) start_.arrive_and_wait();
    execute(0);
    if (!threads_.empty()) done_.arrive_and_wait();
    task_ = nullptr;
    for (std::exception_ptr& e : errors_) {
      if (e) {
        std::exception_ptr first = std::exchange(e, nullptr);
        for (std::exception_ptr& rest : errors_) rest = nullptr;
        std::rethrow_exception(first);
      }
    }
  }

 private:
  void execute(std::size_t k) {
    try {
      (*task_)(k);
    } catch (...) {
      errors_[k] = std::current_exception();
    }
  }

  void loop(std::size_t k) {
    for (;;) {
      start_.arrive_and_wait();
      if (stop_) return;
      execute(k);
      done_.arrive_and_wait();
    }
  }

  std::barrier<> start_;
  std::barrier<> done_;
  std::vector<std::exception_ptr> errors_;
  const std::function<void(std::size_t)>* task_ = nullptr;
  bool stop_ = false;
  std::vector<std::jthread> threads_;
};

/// Per-kernel state adapters driven by the runner. Each splits one color phase
/// into work ranges (plane rows, or sub-lattices for gemm) with disjoint writes.
class BasicEngine {
 public:
  static constexpr std::size_t kMinUnitsPerWorker = 2;

  BasicEngine(Lattice initial, const SimConfig&, std::size_t) : lat_(std::move(initial)) {}

  std::size_t units() const noexcept { return lat_.geometry.rows; }
  void update(Color c, const AcceptanceTable& t, std::uint64_t seed, std::uint64_t step, RowRange r, std::size_t) {
    update_rows_basic(lat_.plane(c), lat_.plane(opposite(c)), t, seed, step, r.begin, r.end);
  }
  Lattice lattice() const { return lat_; }

 private:
  Lattice lat_;
};

class PackedEngine {
 public:
  static constexpr std::size_t kMinUnitsPerWorker = 2;

  PackedEngine(const Lattice& initial, const SimConfig&, std::size_t) : lat_(pack(initial)) {}

  std::size_t units() const noexcept { return lat_.geometry.rows; }
  void update(Color c, const AcceptanceTable& t, std::uint64_t seed, std::uint64_t step, RowRange r, std::size_t) {
    update_rows_packed(lat_.plane(c), lat_.plane(opposite(c)), t, seed, step, r.begin, r.end);
  }
  Lattice lattice() const { return unpack(lat_); }

 private:
  PackedLattice lat_;
};

class GemmEngine {
 public:
  static constexpr std::size_t kMinUnitsPerWorker = 1;

  GemmEngine(const Lattice& initial, const SimConfig& cfg, std::size_t workers)
      : blocks_(to_blocks(initial, cfg.block_size)), ws_(blocks_), scratch_(workers) {}

  std::size_t units() const noexcept { return blocks_.sub_count(); }
  void update(Color c, const AcceptanceTable& t, std::uint64_t seed, std::uint64_t step, RowRange r,
              std::size_t worker) {
    update_color_gemm_range(blocks_, ws_, c, t, seed, step, r.begin, r.end, scratch_[worker]);
  }
  Lattice lattice() const { return from_blocks(blocks_); }

 private:
  BlockLattice blocks_;
  GemmWorkspace ws_;
  std::vector<std::vector<MatmulTask>> scratch_;
};

struct RunResult {
  Lattice lattice;
  ObservableSeries series;
  std::uint64_t measured_sweeps = 0;
  double elapsed_ns = 0.0;  // measured sweeps only
  double black_phase_ns = 0.0;
  double white_phase_ns = 0.0;
  double flips_per_ns = 0.0;
  bool valid = true;
  std::string error;
};

/// Throws std::invalid_argument when `cfg` cannot run.
inline void validate_run_config(const SimConfig& cfg) {
  require_kernel_alignment(cfg.kernel, cfg.geometry(), cfg.block_size);
  if (cfg.workers < 1) throw std::invalid_argument("--workers must be >= 1");
  AcceptanceTable(cfg.beta, cfg.rule);
  if (cfg.kernel == KernelKind::gemm) {
    const std::size_t subs = (cfg.rows / (2 * cfg.block_size)) * (cfg.cols / (2 * cfg.block_size));
    partition_range(subs, cfg.workers, GemmEngine::kMinUnitsPerWorker);
  } else {
    partition_slabs(cfg.rows, cfg.workers);
  }
}

namespace detail {

template <class Engine>
RunResult run_with(const SimConfig& cfg, Lattice initial) {
  const AcceptanceTable table(cfg.beta, cfg.rule);
  const std::size_t workers = cfg.workers;
  Engine engine(std::move(initial), cfg, workers);
  const SlabPartition slabs = partition_range(engine.units(), workers, Engine::kMinUnitsPerWorker);
  PhasePool pool(workers);

  RunResult result;
  auto phase = [&](Color c, std::uint64_t step) {
    const std::function<void(std::size_t)> task = [&](std::size_t k) {
      engine.update(c, table, cfg.seed, step, slabs.slabs[k], k);
    };
    const auto t0 = std::chrono::steady_clock::now();
    pool.run(task);
    return std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - t0).count();
  };

  std::uint64_t step = 1;
  try {
    for (std::uint64_t w = 0; w < cfg.warmup; ++w, ++step) {
      phase(Color::black, step);
      phase(Color::white, step);
    }
    for (std::uint64_t k = 1; k <= cfg.sweeps; ++k, ++step) {
      result.black_phase_ns += phase(Color::black, step);
      result.white_phase_ns += phase(Color::white, step);
      ++result.measured_sweeps;
      if (cfg.measure_every != 0 && k % cfg.measure_every == 0) {
        const Lattice snap = engine.lattice();
        result.series.sweeps.push_back(step);
        result.series.magnetization.push_back(magnetization(snap));
        result.series.energy.push_back(energy_per_site(snap));
        result.series.checksums.push_back(checksum(snap));
      }
    }
  } catch (const std::exception& e) {
    result.valid = false;
    result.error = e.what();
  }

  result.lattice = engine.lattice();
  result.elapsed_ns = result.black_phase_ns + result.white_phase_ns;
  if (result.measured_sweeps > 0 && result.elapsed_ns > 0.0) {
    result.flips_per_ns = flip_rate(result.lattice.geometry, result.measured_sweeps, result.elapsed_ns);
  }
  return result;
}

}  // namespace detail

/// Warmup then measured sweeps from `initial`. Trajectories depend only on
/// (seed, step, site), never on the kernel or the worker count.
inline RunResult run_simulation(const SimConfig& cfg, Lattice initial) {
  validate_run_config(cfg);
  if (initial.geometry != cfg.geometry()) throw std::invalid_argument("initial lattice does not match --lx/--ly");
  switch (cfg.kernel) {
    case KernelKind::basic: return detail::run_with<BasicEngine>(cfg, std::move(initial));
    case KernelKind::packed: return detail::run_with<PackedEngine>(cfg, std::move(initial));
    case KernelKind::gemm: return detail::run_with<GemmEngine>(cfg, std::move(initial));
  }
  throw std::invalid_argument("unknown kernel");
}

inline RunResult run_simulation(const SimConfig& cfg) {
  validate_run_config(cfg);
  return run_simulation(cfg, init_lattice(cfg.geometry(), cfg.seed, cfg.init));
}

}  // namespace ising
