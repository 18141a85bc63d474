#include "dclust/errors.hpp"
#include "dclust/reference/serial.hpp"
#include "dclust/rng.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace dclust::reference {

PathOutput simulate_pool_serial(const ScenarioConfig& config, const PoolLayout& layout, std::uint64_t trial_seed,
                                double blowup_guard) {
  check_structure(config);
  const int steps = config.controls.steps();
  const double dt = config.controls.dt;
  const std::size_t n_names = layout.size;
  const std::size_t r = layout.rank;
  const auto dv = common_noise(trial_seed, steps, dt);

  std::vector<double> lambda(n_names), hazard(n_names, 0.0), threshold(n_names);
  std::vector<bool> alive(n_names, true);
  std::vector<Engine> streams;
  std::vector<std::normal_distribution<double>> normals(n_names);
  for (std::size_t n = 0; n < n_names; ++n) {
    streams.push_back(make_stream(trial_seed, StreamKind::Name, n));
    threshold[n] = std::exponential_distribution<double>(1.0)(streams[n]);
    lambda[n] = config.types[layout.type_of[n]].lambda0;
  }

  PathOutput out;
  out.dv = dv;
  out.min_intensity = std::numeric_limits<double>::infinity();
  std::vector<double> x_path{config.risk.x0};
  const auto moments = [&] {
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t n = 0; n < n_names; ++n) {
      if (!alive[n]) continue;
      m1 += lambda[n];
      m2 += lambda[n] * lambda[n];
      out.min_intensity = std::min(out.min_intensity, lambda[n]);
    }
    out.mean_intensity.push_back(m1 / static_cast<double>(n_names));
    out.mean_intensity_sq.push_back(m2 / static_cast<double>(n_names));
  };
  moments();

  double x = config.risk.x0;
  for (int k = 0; k < steps; ++k) {
    const double inc = config.risk.drift(x) * dt + config.risk.vol(x) * dv[static_cast<std::size_t>(k)];
    for (std::size_t n = 0; n < n_names; ++n) {
      if (!alive[n]) continue;
      const NameType& type = config.types[layout.type_of[n]];
      const double lam = lambda[n];
      hazard[n] += lam * dt;
      const double z = normals[n](streams[n]);
      const double next = lam + drift_value(type.drift, lam) * dt +
                          type.sigma * diffusion_power(lam, type.rho) * std::sqrt(dt) * z +
                          type.beta_s * lam * inc;
      lambda[n] = std::max(next, 0.0);
      if (!(std::abs(next) <= blowup_guard)) throw NumericalBlowup("intensity exceeded the guard");
    }
    x = std::max(x + inc, 0.0);
    x_path.push_back(x);

    std::vector<std::size_t> defaulted;
    for (std::size_t n = 0; n < n_names; ++n) {
      if (alive[n] && hazard[n] >= threshold[n]) {
        alive[n] = false;
        defaulted.push_back(n);
        out.defaults.push_back({n, layout.type_of[n], k + 1, (k + 1) * dt});
      }
    }
    for (std::size_t n = 0; n < n_names && !defaulted.empty(); ++n) {
      if (!alive[n]) continue;
      double jump = 0.0;
      for (std::size_t i : defaulted) {
        double omega = 0.0;
        for (std::size_t j = 0; j < r; ++j) omega += layout.ell[i * r + j] * layout.beta_c[n * r + j];
        jump += omega / static_cast<double>(n_names);
      }
      lambda[n] = std::max(lambda[n] + jump, 0.0);
    }
    moments();
  }

  // Statistics by direct counting at every grid point.
  const std::size_t types = layout.type_count.size();
  out.paths = LossPaths(steps, dt, types, r);
  out.paths.X = x_path;
  for (std::size_t k = 0; k < out.paths.points(); ++k) {
    std::size_t total = 0;
    std::vector<std::size_t> by_type(types, 0);
    std::vector<double> l(r, 0.0);
    for (const auto& ev : out.defaults) {
      if (static_cast<std::size_t>(ev.step) > k) continue;
      ++total;
      ++by_type[ev.type];
      for (std::size_t j = 0; j < r; ++j) l[j] += layout.ell[ev.name * r + j];
    }
    out.paths.D[k] = static_cast<double>(total) / static_cast<double>(n_names);
    for (std::size_t t = 0; t < types; ++t)
      out.paths.D_by_type[t][k] =
          layout.type_count[t] ? static_cast<double>(by_type[t]) / static_cast<double>(layout.type_count[t]) : 0.0;
    for (std::size_t j = 0; j < r; ++j) out.paths.L[j][k] = l[j] / static_cast<double>(n_names);
    for (std::size_t t = 0; t < types; ++t) {
      double q = 0.0;
      for (std::size_t j = 0; j < r; ++j) q += config.types[t].beta_c[j] * out.paths.L[j][k];
      out.paths.Q_by_type[t][k] = q;
    }
  }
  return out;
}

}  // namespace dclust::reference
