// Runs a small lattice with each kernel and checks they agree.
#include <cstdio>

#include "ising/ising.hpp"

int main() {
  ising::SimConfig cfg;
  cfg.rows = 64;
  cfg.cols = 64;
  cfg.beta = 0.44;
  cfg.sweeps = 200;
  cfg.measure_every = 50;
  cfg.seed = 2024;

  const ising::Lattice start = ising::init_lattice(cfg.geometry(), cfg.seed, ising::InitMode::hot);
  std::uint64_t first = 0;
  for (ising::KernelKind k : {ising::KernelKind::basic, ising::KernelKind::packed, ising::KernelKind::gemm}) {
    cfg.kernel = k;
    const ising::RunResult r = ising::run_simulation(cfg, start);
    const std::uint64_t sum = ising::checksum(r.lattice);
    if (k == ising::KernelKind::basic) first = sum;
    std::printf("%-6s m=% .4f  E=% .4f  checksum=%016llx %s\n", ising::to_string(k),
                ising::magnetization(r.lattice), ising::energy_per_site(r.lattice),
                static_cast<unsigned long long>(sum), sum == first ? "" : "(differs!)");
  }
  std::printf("Onsager m at T=2.0: %.6f\n", ising::onsager_magnetization(2.0));
  return 0;
}
