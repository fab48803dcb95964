#pragma once

#include "ising/acceptance.hpp"
#include "ising/blocks.hpp"
#include "ising/config.hpp"
#include "ising/kernel_basic.hpp"
#include "ising/kernel_gemm.hpp"
#include "ising/kernel_packed.hpp"
#include "ising/lattice.hpp"
#include "ising/observables.hpp"
#include "ising/packed.hpp"
#include "ising/parallel.hpp"
#include "ising/rng.hpp"
#include "ising/snapshot.hpp"
