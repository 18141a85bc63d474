#pragma once

// Straightforward single-threaded versions of the parallel kernels. They
// share the RNG stream layout with the main implementations, so results
// agree up to floating-point summation order.

#include "dclust/oracle.hpp"
#include "dclust/particle.hpp"

namespace dclust::reference {

// Contagion applied pairwise through omega(i, n) = sum_j ell_{i,j} beta_{n,j}.
PathOutput simulate_pool_serial(const ScenarioConfig& config, const PoolLayout& layout, std::uint64_t trial_seed,
                                double blowup_guard = 1e6);

OracleOutput mv_solve_serial(const ScenarioConfig& config, std::uint64_t trial_seed, const OracleOptions& options);

}  // namespace dclust::reference
