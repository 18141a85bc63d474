#include "dclust/oracle.hpp"

#include "dclust/errors.hpp"
#include "dclust/rng.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace dclust {

namespace {

struct CloudRun {
  LossPaths paths;
  std::vector<std::vector<double>> mass;
  std::vector<std::vector<double>> coupling;
  double min_intensity = std::numeric_limits<double>::infinity();
  bool weights_monotone = true;
};

struct Chunk {
  std::size_t type;
  std::size_t begin;
  std::size_t end;
};

// Runs the weighted cloud. With fixed_q the contagion drift reads Q from it
// instead of from the cloud; `coupling` always holds the cloud's own Q.
CloudRun run_cloud(const ScenarioConfig& config, std::uint64_t trial_seed, std::span<const double> dv,
                   const OracleOptions& options, const std::vector<std::vector<double>>* fixed_q) {
  const int steps = config.controls.steps();
  const double dt = config.controls.dt;
  const double sqrt_dt = std::sqrt(dt);
  const std::size_t types = config.types.size();
  const std::size_t r = config.rank();
  const std::size_t m = options.particles;
  const std::size_t per_type = (m + options.chunk - 1) / options.chunk;
  const int threads = thread_count(options.exec);

  std::vector<Chunk> chunks;
  for (std::size_t t = 0; t < types; ++t)
    for (std::size_t c = 0; c < per_type; ++c)
      chunks.push_back({t, t * m + c * options.chunk, t * m + std::min(m, (c + 1) * options.chunk)});
  const std::size_t n_chunks = chunks.size();

  std::vector<double> lambda(types * m), hazard(types * m, 0.0), weight(types * m, 1.0);
  std::vector<Engine> streams(n_chunks);
  std::vector<std::normal_distribution<double>> normals(n_chunks);
  for (std::size_t g = 0; g < n_chunks; ++g) {
    streams[g] = make_stream(trial_seed, StreamKind::OracleChunk, g);
    for (std::size_t p = chunks[g].begin; p < chunks[g].end; ++p) lambda[p] = config.types[chunks[g].type].lambda0;
  }

  CloudRun run;
  run.paths = LossPaths(steps, dt, types, r);
  run.mass.assign(types, std::vector<double>(static_cast<std::size_t>(steps) + 1, 0.0));
  run.coupling.assign(static_cast<std::size_t>(steps) + 1, std::vector<double>(r, 0.0));

  std::vector<double> part_w(n_chunks), part_lw(n_chunks), part_min(n_chunks);
  std::vector<char> part_monotone(n_chunks, 1);
  std::vector<double> m1(types), contagion(types);
  double x = config.risk.x0;

  const auto observe = [&](std::size_t k) {
#pragma omp parallel for num_threads(threads) schedule(static)
    for (std::size_t g = 0; g < n_chunks; ++g) {
      double sw = 0.0, slw = 0.0;
      for (std::size_t p = chunks[g].begin; p < chunks[g].end; ++p) {
        sw += weight[p];
        slw += lambda[p] * weight[p];
      }
      part_w[g] = sw;
      part_lw[g] = slw;
    }
    std::fill(m1.begin(), m1.end(), 0.0);
    for (std::size_t t = 0; t < types; ++t) run.mass[t][k] = 0.0;
    for (std::size_t g = 0; g < n_chunks; ++g) {
      run.mass[chunks[g].type][k] += part_w[g];
      m1[chunks[g].type] += part_lw[g];
    }
    const double inv_m = 1.0 / static_cast<double>(m);
    double d = 0.0;
    for (std::size_t t = 0; t < types; ++t) {
      run.mass[t][k] *= inv_m;
      m1[t] *= inv_m;
      d += config.types[t].weight * (1.0 - run.mass[t][k]);
      run.paths.D_by_type[t][k] = 1.0 - run.mass[t][k];
    }
    run.paths.D[k] = d;
    for (std::size_t j = 0; j < r; ++j) {
      double l = 0.0, q = 0.0;
      for (std::size_t t = 0; t < types; ++t) {
        const auto& type = config.types[t];
        l += type.weight * type.ell[j] * (1.0 - run.mass[t][k]);
        q += type.weight * type.ell[j] * m1[t];
      }
      run.paths.L[j][k] = l;
      run.coupling[k][j] = q;
    }
    for (std::size_t t = 0; t < types; ++t) {
      double q = 0.0;
      for (std::size_t j = 0; j < r; ++j) q += config.types[t].beta_c[j] * run.paths.L[j][k];
      run.paths.Q_by_type[t][k] = q;
    }
    run.paths.X[k] = x;
  };

  observe(0);
  for (int k = 0; k < steps; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const auto& q = fixed_q ? (*fixed_q)[ks] : run.coupling[ks];
    for (std::size_t t = 0; t < types; ++t) {
      double c = 0.0;
      for (std::size_t j = 0; j < r; ++j) c += config.types[t].beta_c[j] * q[j];
      contagion[t] = c;
    }
    const FactorStep fs = advance_factor(config.risk, x, dt, dv[ks]);
    int blowup = 0;

#pragma omp parallel for num_threads(threads) schedule(static) reduction(| : blowup)
    for (std::size_t g = 0; g < n_chunks; ++g) {
      const NameType& type = config.types[chunks[g].type];
      const double jump = contagion[chunks[g].type] * dt;
      double lo = std::numeric_limits<double>::infinity();
      for (std::size_t p = chunks[g].begin; p < chunks[g].end; ++p) {
        const double lam = lambda[p];
        hazard[p] += lam * dt;
        const double w = std::exp(-hazard[p]);
        if (w > weight[p]) part_monotone[g] = 0;
        weight[p] = w;
        const double z = normals[g](streams[g]);
        double next = lam + drift_value(type.drift, lam) * dt + type.sigma * diffusion_power(lam, type.rho) * sqrt_dt * z +
                      type.beta_s * lam * fs.increment + jump;
        if (!(std::abs(next) <= options.blowup_guard)) blowup = 1;
        if (next < 0.0) next = 0.0;
        lambda[p] = next;
        lo = std::min(lo, next);
      }
      part_min[g] = lo;
    }
    if (blowup)
      throw NumericalBlowup("oracle intensity exceeded " + std::to_string(options.blowup_guard) + " at t = " +
                            std::to_string((k + 1) * dt) + "; reduce dt");
    for (double v : part_min) run.min_intensity = std::min(run.min_intensity, v);
    x = fs.next;
    observe(ks + 1);
  }
  for (char ok : part_monotone) run.weights_monotone = run.weights_monotone && ok;
  return run;
}

}  // namespace

OracleOutput mv_solve(const ScenarioConfig& config, std::uint64_t trial_seed, const OracleOptions& options) {
  check_structure(config);
  const auto dv = common_noise(trial_seed, config.controls.steps(), config.controls.dt);
  return mv_solve(config, trial_seed, dv, options);
}

OracleOutput mv_solve(const ScenarioConfig& config, std::uint64_t trial_seed, std::span<const double> dv,
                      const OracleOptions& options) {
  check_structure(config);
  if (options.particles < 1) throw MalformedConfig("oracle needs at least one particle per type");
  if (options.chunk < 1) throw MalformedConfig("oracle chunk size must be positive");
  if (options.picard_iterations < 0) throw MalformedConfig("picard iteration count must be nonnegative");
  if (dv.size() != static_cast<std::size_t>(config.controls.steps()))
    throw MalformedConfig("common-noise path has the wrong length");

  CloudRun run = run_cloud(config, trial_seed, dv, options, nullptr);
  OracleOutput out;
  out.min_intensity = run.min_intensity;
  out.weights_monotone = run.weights_monotone;
  out.dv.assign(dv.begin(), dv.end());

  if (options.picard_iterations > 0) {
    auto q = std::vector<std::vector<double>>(run.coupling.size(), std::vector<double>(config.rank(), 0.0));
    CloudRun iter;
    for (int it = 1; it <= options.picard_iterations; ++it) {
      iter = run_cloud(config, trial_seed, dv, options, &q);
      double change = 0.0;
      for (std::size_t k = 0; k < q.size(); ++k)
        for (std::size_t j = 0; j < q[k].size(); ++j) change = std::max(change, std::abs(iter.coupling[k][j] - q[k][j]));
      q = iter.coupling;
      out.picard_iterations = it;
      out.picard_residual = change;
      if (change < options.picard_tol) break;
    }
    for (std::size_t k = 0; k < run.paths.points(); ++k)
      out.picard_gap = std::max(out.picard_gap, std::abs(iter.paths.D[k] - run.paths.D[k]));
  }
  out.paths = std::move(run.paths);
  out.mass = std::move(run.mass);
  out.coupling = std::move(run.coupling);
  return out;
}

}  // namespace dclust
