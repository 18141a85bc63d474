#pragma once

#include "dclust/exec.hpp"
#include "dclust/model.hpp"
#include "dclust/paths.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace dclust {

// u_k(t, type) for k = 0..K, stored type-major.
struct MomentState {
  double t = 0.0;
  double x = 0.0;
  std::size_t types = 0;
  int cap = 0;
  std::vector<double> u;

  double& at(std::size_t type, int k) { return u[type * static_cast<std::size_t>(cap + 1) + static_cast<std::size_t>(k)]; }
  double at(std::size_t type, int k) const {
    return u[type * static_cast<std::size_t>(cap + 1) + static_cast<std::size_t>(k)];
  }
};

// Throws UnsupportedConfig unless every type has affine drift and rho = 1/2.
void require_moment_solver(const ScenarioConfig& config);
bool moment_solver_supports(const ScenarioConfig& config);

// u_k(0) = lambda0^k, X = x0.
MomentState initial_state(const ScenarioConfig& config);

// Q_j = sum_type weight * ell_j * u_1, the rate of the cluster loss L_j.
std::vector<double> coupling_Q(const MomentState& state, const ScenarioConfig& config);

struct MomentOptions {
  double blowup_guard = 1e20;
  double clamp_below = -1e-6;  // moments below this are reset to 0 and counted
};

// One explicit Euler step of the truncated hierarchy driven by dv.
// Throws NumericalBlowup on a non-finite moment or |u_k| > guard.
MomentState step_moments(const MomentState& state, const ScenarioConfig& config, double dv, double dt,
                         const MomentOptions& options = {}, std::size_t* clamp_count = nullptr);

struct TrialOutput {
  LossPaths paths;
  std::vector<std::vector<double>> u0;  // [type][grid index]
  std::size_t clamp_count = 0;
  std::vector<double> dv;
};

TrialOutput solve_trial(const ScenarioConfig& config, std::uint64_t trial_seed, const MomentOptions& options = {});
TrialOutput solve_trial(const ScenarioConfig& config, std::span<const double> dv, const MomentOptions& options = {});

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;

  double bin_left(std::size_t b) const;
  double bin_right(std::size_t b) const;
};

// Equal-width bins over [min, max] of the data; the maximum lands in the last bin.
Histogram make_histogram(std::span<const double> values, int bins);
void write_histogram_csv(const Histogram& h, const std::filesystem::path& path);

struct EnsembleOptions {
  ExecPolicy exec;
  int bins = 50;
  MomentOptions moments;
  std::size_t block = 64;  // trials computed in parallel between callbacks
};

// Trial i uses trial_seed(controls.seed, i). Trials are computed in parallel
// blocks; the callback runs on the calling thread in trial order.
void for_each_trial(const ScenarioConfig& config, const EnsembleOptions& options,
                    const std::function<void(std::int64_t, const TrialOutput&)>& visit);

struct EnsembleOutput {
  LossPaths mean;
  std::vector<double> final_loss;                     // D_T per trial
  std::vector<std::vector<double>> final_loss_by_type;  // [type][trial]
  double mean_final_loss = 0.0;
  double var_final_loss = 0.0;  // unbiased; 0 for one trial
  Histogram histogram;
  std::size_t clamp_count = 0;
  std::size_t order_violations = 0;
  std::int64_t trials = 0;
};

// Grid points and ordered type pairs (a, b) with beta^C_a >= beta^C_b
// componentwise and L_t >= 0 but Q_t(a) < Q_t(b).
std::size_t count_order_violations(const ScenarioConfig& config, const LossPaths& paths);

EnsembleOutput solve_ensemble(const ScenarioConfig& config, const EnsembleOptions& options = {});

// Keeps the first theta clusters and merges types that became identical,
// summing their weights (first label wins).
ScenarioConfig reduce_rank(const ScenarioConfig& config, std::size_t theta);

struct CompareReport {
  std::vector<std::size_t> type_map;            // full type -> reduced type
  std::vector<std::vector<double>> mean_pe;     // [full type][grid index], trial mean of PE_t
  std::vector<double> max_mean_pe_by_type;
  double max_mean_pe = 0.0;
  LossPaths mean_full;
  LossPaths mean_reduced;
  double max_abs_mean_D_diff = 0.0;
  double seconds_full = 0.0;
  double seconds_reduced = 0.0;
  double wall_clock_ratio = 0.0;
  std::int64_t trials = 0;
};

// PE_t = |Q_full - Q_reduced| / |Q_full| per full type under identical
// trial seeds; grid points with Q_full = 0 are skipped.
CompareReport compare_lowrank(const ScenarioConfig& full, const ScenarioConfig& reduced,
                              const EnsembleOptions& options = {});

void write_pe_csv(const CompareReport& report, const std::filesystem::path& path);

}  // namespace dclust
