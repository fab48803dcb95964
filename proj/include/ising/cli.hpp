#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ising/config.hpp"
#include "ising/observables.hpp"
#include "ising/parallel.hpp"
#include "ising/report.hpp"
#include "ising/snapshot.hpp"

namespace ising::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 2, kRuntimeFailure = 3, kCrosscheckMismatch = 4 };

/// Bad or conflicting command-line input; the message names the flag.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// --help was given; carries the rendered help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

inline std::optional<std::string> system_env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr) return std::nullopt;
  return std::string(v);
}

namespace detail {

inline void check_alignment(KernelKind kernel, std::size_t lx, std::size_t ly, std::size_t block) {
  if (lx < 2 || lx % 2 != 0) throw UsageError("--lx must be even and >= 2 (got " + std::to_string(lx) + ")");
  if (ly < 2 || ly % 2 != 0) throw UsageError("--ly must be even and >= 2 (got " + std::to_string(ly) + ")");
  if (kernel == KernelKind::packed && (ly / 2) % kLanesPerWord != 0) {
    throw UsageError("--ly: packed kernel needs ly/2 divisible by 16 (got ly=" + std::to_string(ly) + ")");
  }
  if (kernel == KernelKind::gemm) {
    if (block < 2) throw UsageError("--block-size must be >= 2");
    if (lx % (2 * block) != 0) {
      throw UsageError("--lx: gemm kernel needs lx divisible by 2*B=" + std::to_string(2 * block) + " (got lx=" +
                       std::to_string(lx) + ")");
    }
    if (ly % (2 * block) != 0) {
      throw UsageError("--ly: gemm kernel needs ly divisible by 2*B=" + std::to_string(2 * block) + " (got ly=" +
                       std::to_string(ly) + ")");
    }
  }
}

}  // namespace detail

/// Parses and validates argv. Defaults: warmup 0, measure_every 1, workers 1
/// (or $ISING_THREADS), block size 8, mode run.
inline SimConfig parse_config(int argc, const char* const* argv, const EnvLookup& env = system_env) {
  SimConfig cfg;
  CLI::App app{"2D Ising model Monte Carlo: checkerboard, multi-spin and matrix-multiply kernels", "ising"};

  std::optional<double> beta;
  std::optional<double> temp;
  std::optional<std::size_t> workers;
  std::string kernel = "basic";
  std::string rule = "metropolis";
  std::string init = "hot";
  std::string mode = "run";
  std::string format = "csv";
  std::string scaling = "strong";
  std::string binder_variant = "paper_literal";
  std::vector<std::string> bench_kernels;
  std::vector<std::size_t> bench_workers;
  std::vector<double> temps;

  app.add_option("--lx", cfg.rows, "Lattice rows (N)");
  app.add_option("--ly", cfg.cols, "Lattice columns (M)");
  app.add_option("--beta", beta, "Inverse temperature J/T");
  app.add_option("--temp", temp, "Temperature T in units of J");
  app.add_option("--sweeps", cfg.sweeps, "Measured sweeps");
  app.add_option("--warmup", cfg.warmup, "Warmup sweeps before measuring");
  app.add_option("--measure-every", cfg.measure_every, "Sample observables every k measured sweeps (0 = never)");
  app.add_option("--seed", cfg.seed, "RNG seed");
  app.add_option("--kernel", kernel, "basic | packed | gemm");
  app.add_option("--rule", rule, "metropolis | heatbath");
  app.add_option("--workers", workers, "Worker threads (fallback: $ISING_THREADS)");
  app.add_option("--block-size", cfg.block_size, "Parity block size B for the gemm kernel");
  app.add_option("--init", init, "hot | cold initial lattice");
  app.add_option("--mode", mode, "run | bench | validate | crosscheck");
  app.add_option("--format", format, "csv | json");
  app.add_option("--output", cfg.output, "Output file (default stdout)");
  app.add_option("--dump", cfg.dump_path, "Write the final lattice snapshot here");
  app.add_option("--load", cfg.load_path, "Start from this lattice snapshot");
  app.add_option("--kernels", bench_kernels, "bench: kernels to time")->delimiter(',');
  app.add_option("--workers-list", bench_workers, "bench: worker counts")->delimiter(',');
  app.add_option("--scaling", scaling, "bench: strong | weak");
  app.add_option("--temps", temps, "validate: temperatures")->delimiter(',');
  app.add_option("--binder-sizes", cfg.binder_sizes, "validate: L values for Binder curves")->delimiter(',');
  app.add_option("--binder-output", cfg.binder_output, "validate: Binder table file (default stdout)");
  app.add_option("--binder-variant", binder_variant, "paper_literal | conventional");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (beta && temp) throw UsageError("beta and temp are mutually exclusive");

  const auto k = parse_kernel(kernel);
  if (!k) throw UsageError("--kernel must be basic, packed or gemm (got '" + kernel + "')");
  cfg.kernel = *k;

  if (rule == "metropolis") cfg.rule = UpdateRule::metropolis;
  else if (rule == "heatbath") cfg.rule = UpdateRule::heatbath;
  else throw UsageError("--rule must be metropolis or heatbath (got '" + rule + "')");

  if (init == "hot") cfg.init = InitMode::hot;
  else if (init == "cold") cfg.init = InitMode::cold;
  else throw UsageError("--init must be hot or cold (got '" + init + "')");

  if (mode == "run") cfg.mode = RunMode::run;
  else if (mode == "bench") cfg.mode = RunMode::bench;
  else if (mode == "validate") cfg.mode = RunMode::validate;
  else if (mode == "crosscheck") cfg.mode = RunMode::crosscheck;
  else throw UsageError("--mode must be run, bench, validate or crosscheck (got '" + mode + "')");

  if (format == "csv") cfg.format = OutputFormat::csv;
  else if (format == "json") cfg.format = OutputFormat::json;
  else throw UsageError("--format must be csv or json (got '" + format + "')");

  if (scaling == "strong") cfg.scaling = ScalingMode::strong;
  else if (scaling == "weak") cfg.scaling = ScalingMode::weak;
  else throw UsageError("--scaling must be strong or weak (got '" + scaling + "')");

  if (binder_variant == "paper_literal") cfg.binder_variant = BinderVariant::paper_literal;
  else if (binder_variant == "conventional") cfg.binder_variant = BinderVariant::conventional;
  else throw UsageError("--binder-variant must be paper_literal or conventional");

  if (workers) {
    cfg.workers = *workers;
  } else if (const auto threads = env("ISING_THREADS")) {
    try {
      std::size_t used = 0;
      cfg.workers = std::stoul(*threads, &used);
      if (used != threads->size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw UsageError("ISING_THREADS must be a positive integer (got '" + *threads + "')");
    }
  }
  if (cfg.workers < 1) throw UsageError("--workers must be >= 1");

  if (!bench_kernels.empty()) {
    cfg.bench_kernels.clear();
    for (const std::string& name : bench_kernels) {
      const auto bk = parse_kernel(name);
      if (!bk) throw UsageError("--kernels: unknown kernel '" + name + "'");
      cfg.bench_kernels.push_back(*bk);
    }
  }
  if (!bench_workers.empty()) cfg.bench_workers = bench_workers;
  for (std::size_t w : cfg.bench_workers) {
    if (w < 1) throw UsageError("--workers-list entries must be >= 1");
  }
  if (!temps.empty()) cfg.temperatures = temps;
  for (double t : cfg.temperatures) {
    if (!(t > 0.0)) throw UsageError("--temps entries must be positive");
  }

  switch (cfg.mode) {
    case RunMode::run:
    case RunMode::validate:
      detail::check_alignment(cfg.kernel, cfg.rows, cfg.cols, cfg.block_size);
      break;
    case RunMode::crosscheck:
      for (KernelKind kk : {KernelKind::basic, KernelKind::packed, KernelKind::gemm}) {
        detail::check_alignment(kk, cfg.rows, cfg.cols, cfg.block_size);
      }
      break;
    case RunMode::bench:
      for (KernelKind kk : cfg.bench_kernels) detail::check_alignment(kk, cfg.rows, cfg.cols, cfg.block_size);
      break;
  }
  for (std::size_t l : cfg.binder_sizes) {
    if (l < 2 || l % 2 != 0) throw UsageError("--binder-sizes entries must be even and >= 2");
  }

  if (cfg.mode == RunMode::run || cfg.mode == RunMode::crosscheck) {
    if (!beta && !temp) throw UsageError("one of --beta or --temp is required");
  }
  if (temp) {
    if (!(*temp > 0.0)) throw UsageError("--temp must be positive");
    cfg.temperature = *temp;
    cfg.beta = 1.0 / *temp;
  } else if (beta) {
    if (!(*beta >= 0.0)) throw UsageError("--beta must be >= 0");
    cfg.beta = *beta;
  } else {
    cfg.beta = 1.0 / kCriticalTemperature;
  }

  // Worker/slab constraints only make sense once the geometry is fixed.
  if (cfg.mode == RunMode::run || cfg.mode == RunMode::crosscheck) {
    try {
      SimConfig probe = cfg;
      if (cfg.mode == RunMode::crosscheck) {
        for (KernelKind kk : {KernelKind::basic, KernelKind::packed, KernelKind::gemm}) {
          probe.kernel = kk;
          validate_run_config(probe);
        }
      } else {
        validate_run_config(probe);
      }
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--workers: ") + e.what());
    }
  }
  return cfg;
}

inline SimConfig parse_config(const std::vector<std::string>& args, const EnvLookup& env = system_env) {
  std::vector<const char*> argv{"ising"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  return parse_config(static_cast<int>(argv.size()), argv.data(), env);
}

/// Config echo shared by every emitted file.
inline std::vector<std::pair<std::string, std::string>> config_metadata(const SimConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> m;
  m.emplace_back("program", "ising");
  m.emplace_back("version", kVersion);
  m.emplace_back("mode", to_string(cfg.mode));
  m.emplace_back("lx", std::to_string(cfg.rows));
  m.emplace_back("ly", std::to_string(cfg.cols));
  m.emplace_back("beta", ising::detail::format_double(cfg.beta));
  if (cfg.temperature) m.emplace_back("temp", ising::detail::format_double(*cfg.temperature));
  m.emplace_back("sweeps", std::to_string(cfg.sweeps));
  m.emplace_back("warmup", std::to_string(cfg.warmup));
  m.emplace_back("measure_every", std::to_string(cfg.measure_every));
  m.emplace_back("seed", std::to_string(cfg.seed));
  m.emplace_back("kernel", to_string(cfg.kernel));
  m.emplace_back("rule", to_string(cfg.rule));
  m.emplace_back("workers", std::to_string(cfg.workers));
  m.emplace_back("block_size", std::to_string(cfg.block_size));
  m.emplace_back("init", to_string(cfg.init));
  m.emplace_back("format", to_string(cfg.format));
  if (!cfg.load_path.empty()) m.emplace_back("load", cfg.load_path);
  return m;
}

namespace detail {

/// Output sink: stdout, or a file that is removed again unless commit() ran.
class OutputFile {
 public:
  OutputFile(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {
    if (!path_.empty()) {
      file_.open(path_, std::ios::binary | std::ios::trunc);
      if (!file_) throw std::runtime_error("cannot open " + path_ + " for writing");
    }
  }
  OutputFile(const OutputFile&) = delete;
  OutputFile& operator=(const OutputFile&) = delete;
  ~OutputFile() {
    if (!path_.empty() && !committed_) {
      file_.close();
      std::error_code ec;
      std::filesystem::remove(path_, ec);
    }
  }

  std::ostream& stream() { return path_.empty() ? fallback_ : file_; }
  void commit() {
    if (!path_.empty()) {
      file_.flush();
      if (!file_) throw std::runtime_error("failed writing " + path_);
    }
    committed_ = true;
  }

 private:
  std::string path_;
  std::ostream& fallback_;
  std::ofstream file_;
  bool committed_ = false;
};

inline void write_table(std::ostream& out, const Table& t, OutputFormat f) {
  if (f == OutputFormat::csv) write_csv(out, t);
  else write_json(out, t);
}

inline std::string size_label(const LatticeGeometry& g) { return std::to_string(g.rows) + "x" + std::to_string(g.cols); }

inline std::vector<double> absolute(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = std::abs(v[k]);
  return out;
}

inline int run_single(const SimConfig& cfg, std::ostream& out, std::ostream& err) {
  RunResult result = cfg.load_path.empty() ? run_simulation(cfg) : run_simulation(cfg, load_lattice(cfg.load_path));
  if (!result.valid) {
    err << "error: run aborted: " << result.error << '\n';
    return kRuntimeFailure;
  }
  Table t;
  t.metadata = config_metadata(cfg);
  t.metadata.emplace_back("elapsed_ns", ising::detail::format_double(result.elapsed_ns));
  t.metadata.emplace_back("flips_per_ns", ising::detail::format_double(result.flips_per_ns));
  t.columns = {"sweep", "m", "energy"};
  for (std::size_t k = 0; k < result.series.size(); ++k) {
    t.rows.push_back({result.series.sweeps[k], result.series.magnetization[k], result.series.energy[k]});
  }
  OutputFile sink(cfg.output, out);
  write_table(sink.stream(), t, cfg.format);
  if (!cfg.dump_path.empty()) dump_lattice(cfg.dump_path, result.lattice);
  sink.commit();
  err << "final m=" << ising::detail::format_double(magnetization(result.lattice))
      << " energy=" << ising::detail::format_double(energy_per_site(result.lattice)) << " flips/ns="
      << ising::detail::format_double(result.flips_per_ns) << '\n';
  return kSuccess;
}

inline int run_bench(const SimConfig& cfg, std::ostream& out, std::ostream&) {
  Table t;
  t.metadata = config_metadata(cfg);
  t.metadata.emplace_back("scaling", to_string(cfg.scaling));
  t.columns = {"size", "kernel", "workers", "sweeps", "elapsed_ns", "flips_per_ns", "efficiency"};
  for (KernelKind kernel : cfg.bench_kernels) {
    std::optional<std::pair<std::size_t, double>> reference;
    for (std::size_t w : cfg.bench_workers) {
      SimConfig run = cfg;
      run.kernel = kernel;
      run.workers = w;
      run.measure_every = 0;
      if (cfg.scaling == ScalingMode::weak) run.rows = cfg.rows * w;
      const RunResult r = run_simulation(run);
      if (!r.valid) throw std::runtime_error("bench run failed: " + r.error);
      if (!reference) reference = std::make_pair(w, r.flips_per_ns);
      const double eff = reference->second > 0.0
                             ? (r.flips_per_ns / static_cast<double>(w)) /
                                   (reference->second / static_cast<double>(reference->first))
                             : 0.0;
      t.rows.push_back({size_label(run.geometry()), std::string(to_string(kernel)), std::uint64_t{w},
                        std::uint64_t{r.measured_sweeps}, r.elapsed_ns, r.flips_per_ns, eff});
    }
  }
  OutputFile sink(cfg.output, out);
  write_table(sink.stream(), t, cfg.format);
  sink.commit();
  return kSuccess;
}

inline KernelKind kernel_for_size(const SimConfig& cfg, const LatticeGeometry& g) {
  return kernel_supports(cfg.kernel, g, cfg.block_size) ? cfg.kernel : KernelKind::basic;
}

inline SimConfig temperature_run(const SimConfig& cfg, double temp, std::size_t l_rows, std::size_t l_cols) {
  SimConfig run = cfg;
  run.rows = l_rows;
  run.cols = l_cols;
  run.beta = 1.0 / temp;
  run.temperature = temp;
  run.kernel = kernel_for_size(cfg, run.geometry());
  run.workers = std::min(cfg.workers, run.kernel == KernelKind::gemm ? std::size_t{1} : l_rows / 2);
  if (run.measure_every == 0) run.measure_every = 1;
  return run;
}

inline int run_validate(const SimConfig& cfg, std::ostream& out, std::ostream&) {
  Table mag;
  mag.metadata = config_metadata(cfg);
  mag.columns = {"T", "m_sim", "m_err", "m_onsager"};
  for (double temp : cfg.temperatures) {
    const SimConfig run = temperature_run(cfg, temp, cfg.rows, cfg.cols);
    const RunResult r = run_simulation(run);
    if (!r.valid) throw std::runtime_error("validation run failed: " + r.error);
    if (r.series.size() == 0) throw std::runtime_error("validation run produced no samples; raise --sweeps");
    const MeanError me = batch_means(absolute(r.series.magnetization));
    mag.rows.push_back({temp, me.mean, me.error, onsager_magnetization(temp)});
  }

  Table binder;
  binder.metadata = config_metadata(cfg);
  binder.metadata.emplace_back("binder_variant", to_string(cfg.binder_variant));
  binder.columns = {"size", "T", "U_L"};
  for (std::size_t l : cfg.binder_sizes) {
    const KernelKind used = kernel_for_size(cfg, {l, l});
    binder.metadata.emplace_back("kernel_L" + std::to_string(l), to_string(used));
    for (double temp : cfg.temperatures) {
      const SimConfig run = temperature_run(cfg, temp, l, l);
      const RunResult r = run_simulation(run);
      if (!r.valid) throw std::runtime_error("binder run failed: " + r.error);
      const BinderEstimate u = binder_cumulant(r.series.magnetization, cfg.binder_variant, l);
      binder.rows.push_back({std::uint64_t{l}, temp, u.value});
    }
  }

  OutputFile sink(cfg.output, out);
  write_table(sink.stream(), mag, cfg.format);
  if (!cfg.binder_sizes.empty()) {
    if (cfg.binder_output.empty()) {
      if (cfg.output.empty()) out << '\n';
      OutputFile bsink(cfg.output.empty() ? std::string{} : cfg.output + ".binder", out);
      write_table(bsink.stream(), binder, cfg.format);
      bsink.commit();
    } else {
      OutputFile bsink(cfg.binder_output, out);
      write_table(bsink.stream(), binder, cfg.format);
      bsink.commit();
    }
  }
  sink.commit();
  return kSuccess;
}

inline int run_crosscheck(const SimConfig& cfg, std::ostream& out, std::ostream&) {
  const Lattice initial = cfg.load_path.empty() ? init_lattice(cfg.geometry(), cfg.seed, cfg.init)
                                                : load_lattice(cfg.load_path);
  std::vector<std::pair<KernelKind, RunResult>> results;
  for (KernelKind k : {KernelKind::basic, KernelKind::packed, KernelKind::gemm}) {
    SimConfig run = cfg;
    run.kernel = k;
    if (run.measure_every == 0) run.measure_every = 1;
    RunResult r = run_simulation(run, initial);
    if (!r.valid) throw std::runtime_error(std::string(to_string(k)) + " run failed: " + r.error);
    results.emplace_back(k, std::move(r));
  }
  bool identical = true;
  const RunResult& ref = results.front().second;
  for (const auto& [k, r] : results) {
    const bool same = r.lattice == ref.lattice && r.series == ref.series;
    identical = identical && same;
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(checksum(r.lattice)));
    out << to_string(k) << " final_checksum=" << hex << " samples=" << r.series.size()
        << (same ? " match" : " DIFFERS") << '\n';
  }
  out << (identical ? "IDENTICAL" : "MISMATCH") << '\n';
  return identical ? kSuccess : kCrosscheckMismatch;
}

}  // namespace detail

/// Executes the mode selected in `cfg`; returns the process exit status.
inline int run_mode(const SimConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    switch (cfg.mode) {
      case RunMode::run: return detail::run_single(cfg, out, err);
      case RunMode::bench: return detail::run_bench(cfg, out, err);
      case RunMode::validate: return detail::run_validate(cfg, out, err);
      case RunMode::crosscheck: return detail::run_crosscheck(cfg, out, err);
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kRuntimeFailure;
}

/// Entry point used by the ising executable.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  SimConfig cfg;
  try {
    cfg = parse_config(argc, argv);
  } catch (const HelpRequested& h) {
    out << h.what();
    return kSuccess;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return run_mode(cfg, out, err);
}

}  // namespace ising::cli
