#include "dclust/errors.hpp"
#include "dclust/meanfield.hpp"
#include "dclust/oracle.hpp"
#include "dclust/particle.hpp"
#include "dclust/rng.hpp"

#include <json.hpp>
#include <omp.h>

#include <cmath>
#include <exception>
#include <string>

namespace dclust {

LlnReport lln_harness(const ScenarioConfig& config, std::span<const std::int64_t> pool_sizes,
                      const LlnOptions& options) {
  check_structure(config);
  if (pool_sizes.empty()) throw MalformedConfig("LLN harness needs at least one pool size");
  for (std::size_t i = 0; i < pool_sizes.size(); ++i) {
    if (pool_sizes[i] < 1) throw MalformedConfig("pool sizes must be positive");
    if (i > 0 && pool_sizes[i] <= pool_sizes[i - 1]) throw MalformedConfig("pool sizes must be ascending");
  }
  if (options.trials < 1) throw MalformedConfig("LLN harness needs at least one trial");

  LlnReport report;
  const bool moments = moment_solver_supports(config);
  report.reference = moments ? "meanfield" : "oracle";
  const auto trials = static_cast<std::size_t>(options.trials);
  const int threads = thread_count(options.exec);
  const int steps = config.controls.steps();

  std::vector<double> limit(trials);
  std::vector<std::vector<double>> error(pool_sizes.size(), std::vector<double>(trials));
  std::vector<std::exception_ptr> failures(trials);

  std::vector<PoolLayout> layouts;
  for (auto n : pool_sizes) layouts.push_back(block_layout(config, static_cast<std::size_t>(n)));

  OracleOptions oracle = options.oracle;
  oracle.exec.threads = 1;
  PoolOptions pool;
  pool.exec.threads = 1;

#pragma omp parallel for num_threads(threads) schedule(dynamic)
  for (std::size_t i = 0; i < trials; ++i) {
    try {
      const auto seed = trial_seed(config.controls.seed, i);
      const auto dv = common_noise(seed, steps, config.controls.dt);
      limit[i] = moments ? solve_trial(config, dv).paths.D.back() : mv_solve(config, seed, dv, oracle).paths.D.back();
      for (std::size_t l = 0; l < layouts.size(); ++l)
        error[l][i] = simulate_pool(config, layouts[l], seed, dv, pool).paths.D.back() - limit[i];
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  std::vector<double> log_n, log_rms;
  for (std::size_t l = 0; l < pool_sizes.size(); ++l) {
    double sq = 0.0, ab = 0.0;
    for (double e : error[l]) {
      sq += e * e;
      ab += std::abs(e);
    }
    const double n = static_cast<double>(trials);
    LlnLevel level;
    level.pool_size = pool_sizes[l];
    level.trials = options.trials;
    const double ms = sq / n;
    level.rms_error = std::sqrt(ms);
    level.mean_abs_error = ab / n;
    if (trials > 1 && level.rms_error > 0.0) {
      double var = 0.0;
      for (double e : error[l]) var += (e * e - ms) * (e * e - ms);
      var /= (n - 1.0);
      level.rms_se = std::sqrt(var / n) / (2.0 * level.rms_error);
    }
    report.levels.push_back(level);
    log_n.push_back(std::log(static_cast<double>(pool_sizes[l])));
    log_rms.push_back(std::log(level.rms_error));
  }

  report.monotone = true;
  for (std::size_t l = 1; l < report.levels.size(); ++l)
    report.monotone = report.monotone && report.levels[l].rms_error < report.levels[l - 1].rms_error;

  const std::size_t k = log_n.size();
  if (k >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t l = 0; l < k; ++l) {
      mx += log_n[l];
      my += log_rms[l];
    }
    mx /= static_cast<double>(k);
    my /= static_cast<double>(k);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t l = 0; l < k; ++l) {
      sxx += (log_n[l] - mx) * (log_n[l] - mx);
      sxy += (log_n[l] - mx) * (log_rms[l] - my);
    }
    report.slope = sxy / sxx;
    if (k >= 3) {
      double rss = 0.0;
      for (std::size_t l = 0; l < k; ++l) {
        const double res = log_rms[l] - my - report.slope * (log_n[l] - mx);
        rss += res * res;
      }
      report.slope_se = std::sqrt(rss / static_cast<double>(k - 2) / sxx);
    }
  }
  report.band_lo = report.slope - 2.0 * report.slope_se;
  report.band_hi = report.slope + 2.0 * report.slope_se;
  return report;
}

std::string to_json(const LlnReport& report) {
  nlohmann::ordered_json doc;
  doc["reference"] = report.reference;
  auto& levels = doc["levels"] = nlohmann::ordered_json::array();
  for (const auto& l : report.levels) {
    levels.push_back({{"N", l.pool_size},
                      {"trials", l.trials},
                      {"rms_error", l.rms_error},
                      {"rms_se", l.rms_se},
                      {"mean_abs_error", l.mean_abs_error}});
  }
  doc["slope"] = report.slope;
  doc["slope_se"] = report.slope_se;
  doc["band"] = {report.band_lo, report.band_hi};
  doc["monotone"] = report.monotone;
  return doc.dump(2) + "\n";
}

}  // namespace dclust
