#pragma once

#include "dclust/exec.hpp"
#include "dclust/model.hpp"
#include "dclust/network.hpp"
#include "dclust/paths.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dclust {

// Which type each name has and its contagion coefficients.
// beta_c and ell are row-major N x r.
struct PoolLayout {
  std::size_t size = 0;
  std::size_t rank = 0;
  std::vector<std::size_t> type_of;
  std::vector<double> beta_c;
  std::vector<double> ell;
  std::vector<std::size_t> type_count;

  std::span<const double> beta_row(std::size_t name) const { return {beta_c.data() + name * rank, rank}; }
  std::span<const double> ell_row(std::size_t name) const { return {ell.data() + name * rank, rank}; }
};

// Consecutive blocks: type i owns names [round(N * W_{i-1}), round(N * W_i))
// where W_i is the cumulative weight. Names copy their type's beta^C and ell.
PoolLayout block_layout(const ScenarioConfig& config, std::size_t pool_size);
PoolLayout block_layout(const ScenarioConfig& config);

// Block type assignment for the dynamics, with per-name beta^C and ell
// read from the decomposition. Requires svd.n == pool_size and svd.rank == r.
PoolLayout svd_layout(const ScenarioConfig& config, const NetworkSVD& svd);

struct DefaultEvent {
  std::size_t name = 0;
  std::size_t type = 0;
  int step = 0;  // first grid index with tau <= t
  double time = 0.0;

  bool operator==(const DefaultEvent&) const = default;
};

struct PoolOptions {
  double blowup_guard = 1e6;
  ExecPolicy exec;
};

struct PathOutput {
  LossPaths paths;
  std::vector<DefaultEvent> defaults;  // in order of occurrence
  double min_intensity = 0.0;          // over all names and steps
  // (1/N) sum over surviving names of lambda and lambda^2, per grid point.
  std::vector<double> mean_intensity;
  std::vector<double> mean_intensity_sq;
  std::vector<double> dv;
};

// One path of the finite pool. Throws NumericalBlowup if some |lambda|
// exceeds the guard.
PathOutput simulate_pool(const ScenarioConfig& config, const PoolLayout& layout, std::uint64_t trial_seed,
                         const PoolOptions& options = {});
// Same with an explicit common-noise path (one dV per step).
PathOutput simulate_pool(const ScenarioConfig& config, const PoolLayout& layout, std::uint64_t trial_seed,
                         std::span<const double> dv, const PoolOptions& options = {});

// D, D_by_type, L and Q on the grid from default events; X is left at 0.
// Q_by_type is the type average of beta^C_n . L.
LossPaths portfolio_stats(const PoolLayout& layout, std::span<const DefaultEvent> defaults, int steps, double dt);

struct PoolEnsemble {
  LossPaths mean;
  std::vector<double> final_loss;  // D_T per trial
  double mean_final_loss = 0.0;
  double var_final_loss = 0.0;
  double min_intensity = 0.0;
  std::vector<DefaultEvent> first_trial_defaults;
  std::int64_t trials = 0;
};

// Trial i uses trial_seed(controls.seed, i); trials run in parallel, each
// pool on one thread, and are reduced in trial order.
PoolEnsemble simulate_pool_ensemble(const ScenarioConfig& config, const PoolLayout& layout,
                                    const PoolOptions& options = {});

void write_defaults_csv(std::span<const DefaultEvent> defaults, const std::filesystem::path& path);

}  // namespace dclust
