#include "dclust/particle.hpp"

#include "dclust/csv.hpp"
#include "dclust/errors.hpp"
#include "dclust/rng.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <string>

namespace dclust {

namespace {

std::vector<std::size_t> block_boundaries(const ScenarioConfig& config, std::size_t n) {
  std::vector<std::size_t> bounds{0};
  double cumulative = 0.0;
  for (std::size_t i = 0; i < config.types.size(); ++i) {
    cumulative += config.types[i].weight;
    auto b = static_cast<std::size_t>(std::llround(static_cast<double>(n) * cumulative));
    if (i + 1 == config.types.size()) b = n;
    bounds.push_back(std::clamp(b, bounds.back(), n));
  }
  return bounds;
}

// Mean beta^C row per type; Q(type) = this . L.
std::vector<std::vector<double>> type_beta(const PoolLayout& layout, std::size_t types) {
  std::vector<std::vector<double>> beta(types, std::vector<double>(layout.rank, 0.0));
  for (std::size_t n = 0; n < layout.size; ++n) {
    auto& b = beta[layout.type_of[n]];
    for (std::size_t j = 0; j < layout.rank; ++j) b[j] += layout.beta_c[n * layout.rank + j];
  }
  for (std::size_t t = 0; t < types; ++t)
    if (layout.type_count[t] > 0)
      for (double& v : beta[t]) v /= static_cast<double>(layout.type_count[t]);
  return beta;
}

}  // namespace

PoolLayout block_layout(const ScenarioConfig& config, std::size_t pool_size) {
  check_structure(config);
  PoolLayout layout;
  layout.size = pool_size;
  layout.rank = config.rank();
  layout.type_of.resize(pool_size);
  layout.beta_c.resize(pool_size * layout.rank);
  layout.ell.resize(pool_size * layout.rank);
  layout.type_count.assign(config.types.size(), 0);
  const auto bounds = block_boundaries(config, pool_size);
  for (std::size_t t = 0; t < config.types.size(); ++t) {
    const auto& type = config.types[t];
    for (std::size_t n = bounds[t]; n < bounds[t + 1]; ++n) {
      layout.type_of[n] = t;
      std::copy(type.beta_c.begin(), type.beta_c.end(), layout.beta_c.begin() + static_cast<std::ptrdiff_t>(n * layout.rank));
      std::copy(type.ell.begin(), type.ell.end(), layout.ell.begin() + static_cast<std::ptrdiff_t>(n * layout.rank));
    }
    layout.type_count[t] = bounds[t + 1] - bounds[t];
  }
  return layout;
}

PoolLayout block_layout(const ScenarioConfig& config) {
  return block_layout(config, static_cast<std::size_t>(config.pool_size));
}

PoolLayout svd_layout(const ScenarioConfig& config, const NetworkSVD& svd) {
  if (svd.n != static_cast<std::size_t>(config.pool_size))
    throw MalformedConfig("pool size " + std::to_string(config.pool_size) + " differs from matrix dimension " +
                          std::to_string(svd.n));
  if (svd.rank != config.rank())
    throw MalformedConfig("scenario rank " + std::to_string(config.rank()) + " differs from decomposition rank " +
                          std::to_string(svd.rank));
  PoolLayout layout = block_layout(config);
  for (std::size_t n = 0; n < layout.size; ++n) {
    for (std::size_t j = 0; j < layout.rank; ++j) {
      layout.beta_c[n * layout.rank + j] = svd.beta_c(n, j);
      layout.ell[n * layout.rank + j] = svd.ell(n, j);
    }
  }
  return layout;
}

PathOutput simulate_pool(const ScenarioConfig& config, const PoolLayout& layout, std::uint64_t trial_seed,
                         const PoolOptions& options) {
  check_structure(config);
  const auto dv = common_noise(trial_seed, config.controls.steps(), config.controls.dt);
  return simulate_pool(config, layout, trial_seed, dv, options);
}

PathOutput simulate_pool(const ScenarioConfig& config, const PoolLayout& layout, std::uint64_t trial_seed,
                         std::span<const double> dv, const PoolOptions& options) {
  check_structure(config);
  const int steps = config.controls.steps();
  const double dt = config.controls.dt;
  const double sqrt_dt = std::sqrt(dt);
  if (dv.size() != static_cast<std::size_t>(steps)) throw MalformedConfig("common-noise path has the wrong length");
  if (layout.type_count.size() != config.types.size() || layout.rank != config.rank())
    throw MalformedConfig("pool layout does not match the scenario");

  const std::size_t n_names = layout.size;
  const std::size_t r = layout.rank;
  const double inv_n = n_names > 0 ? 1.0 / static_cast<double>(n_names) : 0.0;
  const int threads = thread_count(options.exec);

  std::vector<double> lambda(n_names), hazard(n_names, 0.0), threshold(n_names);
  std::vector<char> alive(n_names, 1);
  std::vector<Engine> streams(n_names);
  std::vector<std::normal_distribution<double>> normals(n_names);

#pragma omp parallel for num_threads(threads) schedule(static)
  for (std::size_t n = 0; n < n_names; ++n) {
    streams[n] = make_stream(trial_seed, StreamKind::Name, n);
    threshold[n] = std::exponential_distribution<double>(1.0)(streams[n]);
    lambda[n] = config.types[layout.type_of[n]].lambda0;
  }

  PathOutput out;
  out.paths = LossPaths(steps, dt, config.types.size(), r);
  out.dv.assign(dv.begin(), dv.end());
  out.mean_intensity.assign(static_cast<std::size_t>(steps) + 1, 0.0);
  out.mean_intensity_sq.assign(static_cast<std::size_t>(steps) + 1, 0.0);
  out.min_intensity = std::numeric_limits<double>::infinity();

  const auto record_moments = [&](std::size_t k) {
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t n = 0; n < n_names; ++n) {
      if (!alive[n]) continue;
      m1 += lambda[n];
      m2 += lambda[n] * lambda[n];
      out.min_intensity = std::min(out.min_intensity, lambda[n]);
    }
    out.mean_intensity[k] = m1 * inv_n;
    out.mean_intensity_sq[k] = m2 * inv_n;
  };

  double x = config.risk.x0;
  out.paths.X[0] = x;
  record_moments(0);
  std::vector<double> delta_l(r);

  for (int k = 0; k < steps; ++k) {
    const FactorStep fs = advance_factor(config.risk, x, dt, dv[static_cast<std::size_t>(k)]);
    int blowup = 0;

#pragma omp parallel for num_threads(threads) schedule(static) reduction(| : blowup)
    for (std::size_t n = 0; n < n_names; ++n) {
      if (!alive[n]) continue;
      const NameType& type = config.types[layout.type_of[n]];
      const double lam = lambda[n];
      hazard[n] += lam * dt;
      const double z = normals[n](streams[n]);
      double next = lam + drift_value(type.drift, lam) * dt + type.sigma * diffusion_power(lam, type.rho) * sqrt_dt * z +
                    type.beta_s * lam * fs.increment;
      if (!(std::abs(next) <= options.blowup_guard)) blowup = 1;
      if (next < 0.0) next = 0.0;
      lambda[n] = next;
    }
    if (blowup)
      throw NumericalBlowup("intensity exceeded " + std::to_string(options.blowup_guard) + " at t = " +
                            std::to_string((k + 1) * dt) + "; reduce dt");
    x = fs.next;

    // Default sweep in ascending name order, contagion applied once afterwards.
    std::fill(delta_l.begin(), delta_l.end(), 0.0);
    bool any = false;
    for (std::size_t n = 0; n < n_names; ++n) {
      if (!alive[n] || hazard[n] < threshold[n]) continue;
      alive[n] = 0;
      any = true;
      out.defaults.push_back({n, layout.type_of[n], k + 1, (k + 1) * dt});
      for (std::size_t j = 0; j < r; ++j) delta_l[j] += layout.ell[n * r + j] * inv_n;
    }
    if (any) {
#pragma omp parallel for num_threads(threads) schedule(static)
      for (std::size_t n = 0; n < n_names; ++n) {
        if (!alive[n]) continue;
        double jump = 0.0;
        for (std::size_t j = 0; j < r; ++j) jump += layout.beta_c[n * r + j] * delta_l[j];
        const double next = lambda[n] + jump;
        lambda[n] = next > 0.0 ? next : 0.0;
      }
    }
    out.paths.X[static_cast<std::size_t>(k) + 1] = x;
    record_moments(static_cast<std::size_t>(k) + 1);
  }

  auto stats = portfolio_stats(layout, out.defaults, steps, dt);
  stats.X = std::move(out.paths.X);
  out.paths = std::move(stats);
  if (n_names == 0) out.min_intensity = 0.0;
  return out;
}

LossPaths portfolio_stats(const PoolLayout& layout, std::span<const DefaultEvent> defaults, int steps, double dt) {
  const std::size_t types = layout.type_count.size();
  const std::size_t r = layout.rank;
  const auto points = static_cast<std::size_t>(steps) + 1;
  LossPaths paths(steps, dt, types, r);
  const double n_names = static_cast<double>(layout.size);

  // Increments per grid point, then cumulative sums.
  std::vector<std::size_t> count(points, 0);
  std::vector<std::vector<std::size_t>> count_by_type(types, std::vector<std::size_t>(points, 0));
  std::vector<std::vector<double>> ell_sum(r, std::vector<double>(points, 0.0));
  for (const auto& ev : defaults) {
    const auto k = static_cast<std::size_t>(ev.step);
    ++count[k];
    ++count_by_type[ev.type][k];
    for (std::size_t j = 0; j < r; ++j) ell_sum[j][k] += layout.ell[ev.name * r + j];
  }
  const auto beta = type_beta(layout, types);
  std::size_t total = 0;
  std::vector<std::size_t> total_by_type(types, 0);
  std::vector<double> ell_total(r, 0.0);
  for (std::size_t k = 0; k < points; ++k) {
    total += count[k];
    paths.D[k] = static_cast<double>(total) / n_names;
    for (std::size_t t = 0; t < types; ++t) {
      total_by_type[t] += count_by_type[t][k];
      paths.D_by_type[t][k] =
          layout.type_count[t] > 0 ? static_cast<double>(total_by_type[t]) / static_cast<double>(layout.type_count[t]) : 0.0;
    }
    for (std::size_t j = 0; j < r; ++j) {
      ell_total[j] += ell_sum[j][k];
      paths.L[j][k] = ell_total[j] / n_names;
    }
    for (std::size_t t = 0; t < types; ++t) {
      double q = 0.0;
      for (std::size_t j = 0; j < r; ++j) q += beta[t][j] * paths.L[j][k];
      paths.Q_by_type[t][k] = q;
    }
  }
  return paths;
}

PoolEnsemble simulate_pool_ensemble(const ScenarioConfig& config, const PoolLayout& layout,
                                    const PoolOptions& options) {
  check_structure(config);
  const std::int64_t trials = config.controls.trials;
  constexpr std::int64_t block = 64;
  const int threads = thread_count(options.exec);
  PoolOptions single = options;
  single.exec.threads = 1;

  PoolEnsemble out;
  out.trials = trials;
  out.mean = LossPaths(config.controls.steps(), config.controls.dt, config.types.size(), config.rank());
  out.min_intensity = std::numeric_limits<double>::infinity();
  std::vector<PathOutput> results(block);
  std::vector<std::exception_ptr> errors(block);
  for (std::int64_t start = 0; start < trials; start += block) {
    const std::int64_t count = std::min(block, trials - start);
#pragma omp parallel for num_threads(threads) schedule(dynamic)
    for (std::int64_t i = 0; i < count; ++i) {
      errors[static_cast<std::size_t>(i)] = nullptr;
      try {
        results[static_cast<std::size_t>(i)] =
            simulate_pool(config, layout, trial_seed(config.controls.seed, static_cast<std::uint64_t>(start + i)), single);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
    for (std::int64_t i = 0; i < count; ++i) {
      const auto slot = static_cast<std::size_t>(i);
      if (errors[slot]) std::rethrow_exception(errors[slot]);
      auto& r = results[slot];
      accumulate(out.mean, r.paths);
      out.final_loss.push_back(r.paths.D.back());
      out.min_intensity = std::min(out.min_intensity, r.min_intensity);
      if (start + i == 0) out.first_trial_defaults = std::move(r.defaults);
    }
  }
  const double n = static_cast<double>(trials);
  scale(out.mean, 1.0 / n);
  double sum = 0.0;
  for (double v : out.final_loss) sum += v;
  out.mean_final_loss = sum / n;
  double ss = 0.0;
  for (double v : out.final_loss) ss += (v - out.mean_final_loss) * (v - out.mean_final_loss);
  out.var_final_loss = trials > 1 ? ss / (n - 1.0) : 0.0;
  return out;
}

void write_defaults_csv(std::span<const DefaultEvent> defaults, const std::filesystem::path& path) {
  CsvWriter out(path);
  const std::vector<std::string> head{"name", "type", "time"};
  out.header(head);
  for (const auto& ev : defaults) {
    const double row[] = {static_cast<double>(ev.type + 1), ev.time};
    out.row(std::to_string(ev.name), row);
  }
}

}  // namespace dclust
