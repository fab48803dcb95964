// Acceptance suite: one PASS/FAIL line per criterion. Soft criteria report
// SOFT-PASS / SOFT-FAIL / N/A and never change the exit status.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ising/ising.hpp"

using namespace ising;

namespace {

enum class Kind { hard, soft };

struct Verdict {
  bool pass = true;
  bool applicable = true;
  std::string detail;
};

int g_hard_failures = 0;

void report(int id, const char* name, Kind kind, const Verdict& v, double seconds) {
  const char* tag = nullptr;
  if (!v.applicable) {
    tag = "N/A      ";
  } else if (kind == Kind::soft) {
    tag = v.pass ? "SOFT-PASS" : "SOFT-FAIL";
  } else {
    tag = v.pass ? "PASS     " : "FAIL     ";
    if (!v.pass) ++g_hard_failures;
  }
  std::printf("%s C%-2d %s: %s [%.1fs]\n", tag, id, name, v.detail.c_str(), seconds);
  std::fflush(stdout);
}

template <class F>
void criterion(int id, const char* name, Kind kind, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail = std::string("exception: ") + e.what();
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(id, name, kind, v, s);
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

Lattice random_lattice(const LatticeGeometry& g, std::mt19937_64& gen) {
  std::vector<Spin> full(g.sites());
  for (Spin& s : full) s = (gen() & 1) ? 1 : -1;
  return Lattice::from_full(g, full);
}

struct Shape {
  std::size_t rows, cols;
};
constexpr std::array<Shape, 3> kShapes{{{32, 64}, {64, 64}, {128, 128}}};
constexpr std::array<double, 3> kBetas{0.2, 0.4407, 0.8};
constexpr std::array<std::uint64_t, 3> kSeeds{1, 2, 3};

SimConfig base_config(const Shape& s, double beta, std::uint64_t seed) {
  SimConfig cfg;
  cfg.rows = s.rows;
  cfg.cols = s.cols;
  cfg.beta = beta;
  cfg.seed = seed;
  cfg.sweeps = 200;
  cfg.measure_every = 1;
  cfg.block_size = 8;
  return cfg;
}

Verdict cross_kernel() {
  int runs = 0, mismatches = 0;
  for (UpdateRule rule : {UpdateRule::metropolis, UpdateRule::heatbath}) {
    for (const Shape& s : kShapes) {
      for (double beta : kBetas) {
        for (std::uint64_t seed : kSeeds) {
          SimConfig cfg = base_config(s, beta, seed);
          cfg.rule = rule;
          cfg.kernel = KernelKind::basic;
          const RunResult ref = run_simulation(cfg);
          for (KernelKind k : {KernelKind::packed, KernelKind::gemm}) {
            cfg.kernel = k;
            const RunResult r = run_simulation(cfg);
            ++runs;
            // series carries a per-sweep checksum, so this compares whole trajectories
            if (!r.valid || !ref.valid || !(r.lattice == ref.lattice) || !(r.series == ref.series)) ++mismatches;
          }
        }
      }
    }
  }
  Verdict v;
  v.pass = mismatches == 0;
  v.detail = std::to_string(runs) + " packed/gemm trajectories vs basic (both rules, 200 sweeps, per-sweep checksums), " +
             std::to_string(mismatches) + " mismatches";
  return v;
}

Verdict worker_invariance() {
  int runs = 0, mismatches = 0;
  for (KernelKind k : {KernelKind::basic, KernelKind::packed, KernelKind::gemm}) {
    for (const Shape& s : kShapes) {
      for (double beta : kBetas) {
        for (std::uint64_t seed : kSeeds) {
          SimConfig cfg = base_config(s, beta, seed);
          cfg.kernel = k;
          cfg.measure_every = 0;
          const RunResult ref = run_simulation(cfg);
          for (std::size_t w : {2u, 4u, 8u}) {
            cfg.workers = w;
            const RunResult r = run_simulation(cfg);
            ++runs;
            if (!r.valid || !(r.lattice == ref.lattice)) ++mismatches;
          }
        }
      }
    }
  }
  Verdict v;
  v.pass = mismatches == 0;
  v.detail = std::to_string(runs) + " runs with W in {2,4,8} vs W=1 over 3 kernels, " + std::to_string(mismatches) +
             " mismatches";
  return v;
}

Verdict stencil_gemm() {
  std::mt19937_64 gen(2024);
  int lattices = 0;
  long long bad_sites = 0;
  for (std::size_t block : {2u, 4u, 8u}) {
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t max_subs = 64 / (2 * block);
      const LatticeGeometry g{2 * block * (1 + gen() % max_subs), 2 * block * (1 + gen() % max_subs)};
      const Lattice lat = random_lattice(g, gen);
      const BlockLattice blocks = to_blocks(lat, block);
      ++lattices;
      for (Color c : {Color::black, Color::white}) {
        LocalSums sums = local_sums(blocks, c);
        boundary_fixup(sums, blocks, c);
        const auto targets = target_blocks(c);
        for (std::size_t s = 0; s < blocks.sub_count(); ++s) {
          for (std::size_t slot = 0; slot < 2; ++slot) {
            for (std::size_t a = 0; a < block; ++a) {
              for (std::size_t b = 0; b < block; ++b) {
                const SiteCoord site = blocks.site(s, targets[slot], a, b);
                const PlaneCoord p = full_to_plane(g, site.row, site.col);
                if (sums.at(s, slot, a, b) != neighbor_sum(lat.plane(opposite(c)), c, p.row, p.col)) ++bad_sites;
              }
            }
          }
        }
      }
    }
  }
  Verdict v;
  v.pass = bad_sites == 0 && lattices >= 100;
  v.detail = std::to_string(lattices) + " random lattices up to 64x64, B in {2,4,8}, " + std::to_string(bad_sites) +
             " sites differ from the stencil";
  return v;
}

Verdict boltzmann() {
  Verdict v;
  std::ostringstream d;
  double worst = 0.0;
  for (UpdateRule rule : {UpdateRule::metropolis, UpdateRule::heatbath}) {
    for (double beta : kBetas) {
      SimConfig cfg;
      cfg.rows = 4;
      cfg.cols = 4;
      cfg.beta = beta;
      cfg.rule = rule;
      cfg.seed = 17;
      cfg.warmup = 10'000;
      cfg.sweeps = 1'000'000;
      cfg.measure_every = 1;
      const RunResult r = run_simulation(cfg);
      if (!r.valid) throw std::runtime_error(r.error);
      std::vector<double> absm(r.series.magnetization.size());
      std::transform(r.series.magnetization.begin(), r.series.magnetization.end(), absm.begin(),
                     [](double m) { return std::abs(m); });
      const MeanError m = batch_means(absm);
      const MeanError e = batch_means(r.series.energy);
      const ExactAverages exact = exact_averages(4, 4, beta);
      const double zm = std::abs(m.mean - exact.abs_magnetization) / m.error;
      const double ze = std::abs(e.mean - exact.energy) / e.error;
      worst = std::max({worst, zm, ze});
      if (!(zm <= 3.0) || !(ze <= 3.0)) {
        v.pass = false;
        d << " [" << to_string(rule) << " beta=" << beta << " |m| z=" << fmt("%.2f", zm) << " E z=" << fmt("%.2f", ze)
          << "]";
      }
    }
  }
  v.detail = "4x4, 3 betas x 2 rules, 1e6 sweeps: worst deviation " + fmt("%.2f", worst) + " standard errors" + d.str();
  return v;
}

Verdict onsager() {
  Verdict v;
  std::ostringstream d;
  const std::array<std::pair<double, double>, 3> cases{{{1.5, 0.01}, {2.0, 0.01}, {2.1, 0.03}}};
  for (const auto& [t, tol] : cases) {
    SimConfig cfg;
    cfg.rows = 512;
    cfg.cols = 512;
    cfg.beta = 1.0 / t;
    cfg.kernel = KernelKind::packed;
    cfg.init = InitMode::cold;
    cfg.seed = 5;
    cfg.warmup = 10'000;
    cfg.sweeps = 10'000;
    cfg.measure_every = 10;
    const RunResult r = run_simulation(cfg);
    if (!r.valid) throw std::runtime_error(r.error);
    double sum = 0.0;
    for (double m : r.series.magnetization) sum += std::abs(m);
    const double mean = sum / static_cast<double>(r.series.size());
    const double diff = std::abs(mean - onsager_magnetization(t));
    if (!(diff <= tol)) v.pass = false;
    d << " T=" << t << ": " << fmt("%.5f", mean) << " vs " << fmt("%.5f", onsager_magnetization(t)) << " (|d|="
      << fmt("%.4f", diff) << " tol " << tol << ")";
  }
  v.detail = "512^2 packed, 1e4+1e4 sweeps;" + d.str();
  return v;
}

Verdict binder() {
  const std::vector<double> temps{2.10, 2.15, 2.20, 2.25, 2.30, 2.35, 2.40, 2.45};
  const std::array<std::pair<std::size_t, KernelKind>, 3> sizes{
      {{16, KernelKind::basic}, {32, KernelKind::packed}, {64, KernelKind::packed}}};
  std::vector<std::vector<double>> u(sizes.size(), std::vector<double>(temps.size()));
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    for (std::size_t k = 0; k < temps.size(); ++k) {
      SimConfig cfg;
      cfg.rows = cfg.cols = sizes[s].first;
      cfg.kernel = sizes[s].second;
      cfg.beta = 1.0 / temps[k];
      cfg.init = InitMode::cold;
      cfg.seed = 100 + 10 * s + k;
      cfg.warmup = 20'000;
      cfg.sweeps = 400'000;
      cfg.measure_every = 1;
      const RunResult r = run_simulation(cfg);
      if (!r.valid) throw std::runtime_error(r.error);
      u[s][k] = binder_cumulant(r.series.magnetization, BinderVariant::paper_literal, sizes[s].first).value;
    }
  }
  Verdict v;
  std::ostringstream d;
  for (std::size_t a = 0; a < sizes.size(); ++a) {
    for (std::size_t b = a + 1; b < sizes.size(); ++b) {
      int crossings = 0;
      for (std::size_t k = 0; k + 1 < temps.size(); ++k) {
        const double d0 = u[a][k] - u[b][k];
        const double d1 = u[a][k + 1] - u[b][k + 1];
        if ((d0 < 0) != (d1 < 0)) {
          const double t = temps[k] + (temps[k + 1] - temps[k]) * d0 / (d0 - d1);
          ++crossings;
          if (!(t >= 2.2 && t <= 2.35)) v.pass = false;
          d << " L" << sizes[a].first << "/L" << sizes[b].first << " at " << fmt("%.4f", t);
        }
      }
      if (crossings == 0) {
        v.pass = false;
        d << " L" << sizes[a].first << "/L" << sizes[b].first << " no crossing";
      }
    }
  }
  std::ostringstream curves;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    curves << " U" << sizes[s].first << "=";
    for (std::size_t k = 0; k < temps.size(); ++k) curves << (k ? "," : "") << fmt("%.3f", u[s][k]);
  }
  v.detail = "4e5 measured sweeps per point, crossings:" + d.str() + ";" + curves.str();
  return v;
}

double measured_rate(KernelKind kernel, std::size_t rows, std::size_t cols, std::size_t workers, std::uint64_t sweeps) {
  SimConfig cfg;
  cfg.rows = rows;
  cfg.cols = cols;
  cfg.beta = 0.4407;
  cfg.kernel = kernel;
  cfg.workers = workers;
  cfg.sweeps = sweeps;
  cfg.warmup = 1;
  cfg.measure_every = 0;
  const RunResult r = run_simulation(cfg);
  if (!r.valid) throw std::runtime_error(r.error);
  return r.flips_per_ns;
}

Verdict multispin_speedup() {
  const double basic = measured_rate(KernelKind::basic, 4096, 4096, 1, 8);
  const double packed = measured_rate(KernelKind::packed, 4096, 4096, 1, 8);
  Verdict v;
  v.pass = packed >= 1.5 * basic;
  v.detail = "4096^2, W=1: basic " + fmt("%.4f", basic) + " flips/ns, packed " + fmt("%.4f", packed) +
             " flips/ns, ratio " + fmt("%.2f", packed / basic) + " (need >= 1.5)";
  return v;
}

Verdict weak_scaling() {
  const unsigned cores = std::thread::hardware_concurrency();
  const double one = measured_rate(KernelKind::packed, 512, 2048, 1, 16);
  const double four = measured_rate(KernelKind::packed, 2048, 2048, 4, 16);
  const double eff = four / (4.0 * one);
  Verdict v;
  v.pass = eff >= 0.70;
  v.applicable = cores >= 4;
  v.detail = "packed, 512x2048 per worker, W=4 efficiency " + fmt("%.1f%%", 100.0 * eff) + " (need >= 70%); host has " +
             std::to_string(cores) + " hardware threads" + (cores >= 4 ? "" : ", criterion needs >= 4 cores");
  return v;
}

// Upper tail of the chi-square distribution via the regularized lower gamma series.
double chi_square_p(double x, int dof) {
  const double a = dof / 2.0;
  const double h = x / 2.0;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 1000; ++n) {
    term *= h / (a + n);
    sum += term;
    if (term < sum * 1e-16) break;
  }
  return 1.0 - std::exp(-h + a * std::log(h) - std::lgamma(a)) * sum;
}

Verdict rng_sanity() {
  struct Kat {
    PhiloxCounter ctr;
    PhiloxKey key;
    PhiloxCounter expect;
  };
  const Kat kats[] = {
      {{0, 0, 0, 0}, {0, 0}, {0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}},
      {{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
       {0xffffffffu, 0xffffffffu},
       {0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}},
      {{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
       {0xa4093822u, 0x299f31d0u},
       {0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}},
  };
  int kat_ok = 0;
  for (const Kat& k : kats) kat_ok += philox4x32_10(k.ctr, k.key) == k.expect ? 1 : 0;

  std::array<double, 16> bins{};
  const std::uint64_t n = 1'000'000;
  for (std::uint64_t k = 0; k < n; ++k) bins[static_cast<std::size_t>(uniform_for({42, k, 2}) * 16.0)] += 1.0;
  const double expected = static_cast<double>(n) / 16.0;
  double chi2 = 0.0;
  for (double b : bins) chi2 += (b - expected) * (b - expected) / expected;
  const double p = chi_square_p(chi2, 15);

  Verdict v;
  v.pass = kat_ok == 3 && p > 0.001;
  v.detail = std::to_string(kat_ok) + "/3 known-answer vectors; chi-square(15) = " + fmt("%.2f", chi2) +
             ", p = " + fmt("%.4f", p) + " (need > 0.001)";
  return v;
}

Verdict round_trips() {
  std::mt19937_64 gen(77);
  const int cases = 1000;
  int pack_bad = 0, block_bad = 0, dump_bad = 0;
  const auto dir = std::filesystem::temp_directory_path() / "ising_acceptance";
  std::filesystem::create_directories(dir);
  for (int t = 0; t < cases; ++t) {
    const Lattice lp = random_lattice({2 + 2 * (gen() % 16), 32 * (1 + gen() % 4)}, gen);
    const PackedLattice packed = pack(lp);
    if (!(unpack(packed) == lp) || !packed.black.lanes_valid() || !packed.white.lanes_valid()) ++pack_bad;

    const std::size_t block = std::size_t{1} << (1 + gen() % 3);
    const Lattice lb = random_lattice({2 * block * (1 + gen() % 4), 2 * block * (1 + gen() % 4)}, gen);
    if (!(from_blocks(to_blocks(lb, block)) == lb)) ++block_bad;

    const Lattice ld = random_lattice({2 + 2 * (gen() % 20), 2 + 2 * (gen() % 20)}, gen);
    const std::string path = (dir / ("snap" + std::to_string(t % 8) + ".bin")).string();
    dump_lattice(path, ld);
    if (!(load_lattice(path) == ld)) ++dump_bad;
  }
  std::filesystem::remove_all(dir);
  Verdict v;
  v.pass = pack_bad == 0 && block_bad == 0 && dump_bad == 0;
  v.detail = std::to_string(cases) + " random cases each: pack/unpack " + std::to_string(pack_bad) +
             " bad, to_blocks/from_blocks " + std::to_string(block_bad) + " bad, dump/load " +
             std::to_string(dump_bad) + " bad";
  return v;
}

}  // namespace

int main() {
  criterion(1, "cross-kernel exactness", Kind::hard, cross_kernel);
  criterion(2, "worker invariance", Kind::hard, worker_invariance);
  criterion(3, "stencil-GEMM equivalence", Kind::hard, stencil_gemm);
  criterion(4, "Boltzmann correctness", Kind::hard, boltzmann);
  criterion(5, "Onsager agreement", Kind::hard, onsager);
  criterion(6, "Binder crossing", Kind::hard, binder);
  criterion(7, "multi-spin speedup", Kind::soft, multispin_speedup);
  criterion(8, "weak scaling", Kind::soft, weak_scaling);
  criterion(9, "RNG sanity", Kind::hard, rng_sanity);
  criterion(10, "round trips", Kind::hard, round_trips);
  std::printf("%s: %d hard criteria failed\n", g_hard_failures == 0 ? "ACCEPTED" : "REJECTED", g_hard_failures);
  return g_hard_failures == 0 ? 0 : 1;
}
