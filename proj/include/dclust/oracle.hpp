#pragma once

#include "dclust/exec.hpp"
#include "dclust/model.hpp"
#include "dclust/paths.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dclust {

struct OracleOptions {
  std::size_t particles = 100000;  // per type
  std::size_t chunk = 1024;        // particles sharing one RNG stream
  int picard_iterations = 0;       // 0 disables the path-level diagnostic
  double picard_tol = 1e-6;
  double blowup_guard = 1e6;
  ExecPolicy exec;
};

struct OracleOutput {
  LossPaths paths;
  std::vector<std::vector<double>> mass;      // [type][grid index], mean survival weight
  std::vector<std::vector<double>> coupling;  // [grid index][cluster], Q_j fed to the drift
  double min_intensity = 0.0;
  bool weights_monotone = true;
  // Path-level fixed-point diagnostic, filled when picard_iterations > 0.
  int picard_iterations = 0;
  double picard_residual = 0.0;  // sup-norm change of Q in the last iteration
  double picard_gap = 0.0;       // sup_t |D_picard - D_one_pass|
  std::vector<double> dv;
};

// Weighted McKean-Vlasov particles: lambda* carries the contagion drift
// beta^C . Q dt with Q from the cloud at the start of each step, and each
// particle carries w = exp(-int lambda* ds). Accepts any drift and rho.
OracleOutput mv_solve(const ScenarioConfig& config, std::uint64_t trial_seed, const OracleOptions& options = {});
OracleOutput mv_solve(const ScenarioConfig& config, std::uint64_t trial_seed, std::span<const double> dv,
                      const OracleOptions& options = {});

struct LlnLevel {
  std::int64_t pool_size = 0;
  double rms_error = 0.0;
  double mean_abs_error = 0.0;
  double rms_se = 0.0;  // delta-method standard error of rms_error
  std::int64_t trials = 0;
};

struct LlnReport {
  std::vector<LlnLevel> levels;
  double slope = 0.0;  // least-squares slope of log rms vs log N
  double slope_se = 0.0;
  double band_lo = 0.0;  // slope -/+ 2 slope_se
  double band_hi = 0.0;
  bool monotone = false;  // rms strictly decreasing in N
  std::string reference;  // "meanfield" or "oracle"
};

struct LlnOptions {
  std::int64_t trials = 200;
  OracleOptions oracle;  // used when the moment solver does not apply
  ExecPolicy exec;
};

// Trial i of every level uses trial_seed(controls.seed, i), so particle runs
// and the limit share V. Errors are |D_T^N - D_T| per trial.
LlnReport lln_harness(const ScenarioConfig& config, std::span<const std::int64_t> pool_sizes,
                      const LlnOptions& options = {});

std::string to_json(const LlnReport& report);

}  // namespace dclust
