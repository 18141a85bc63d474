#include "dclust/errors.hpp"
#include "dclust/reference/serial.hpp"
#include "dclust/rng.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace dclust::reference {

OracleOutput mv_solve_serial(const ScenarioConfig& config, std::uint64_t trial_seed, const OracleOptions& options) {
  check_structure(config);
  const int steps = config.controls.steps();
  const double dt = config.controls.dt;
  const std::size_t types = config.types.size();
  const std::size_t r = config.rank();
  const std::size_t m = options.particles;
  const std::size_t per_type = (m + options.chunk - 1) / options.chunk;
  const auto dv = common_noise(trial_seed, steps, dt);

  // lambda[type][particle]; one stream per (type, chunk) in the same order as the parallel solver.
  std::vector<std::vector<double>> lambda(types), hazard(types), weight(types);
  std::vector<Engine> streams;
  std::vector<std::normal_distribution<double>> normals(types * per_type);
  for (std::size_t t = 0; t < types; ++t) {
    lambda[t].assign(m, config.types[t].lambda0);
    hazard[t].assign(m, 0.0);
    weight[t].assign(m, 1.0);
    for (std::size_t c = 0; c < per_type; ++c) streams.push_back(make_stream(trial_seed, StreamKind::OracleChunk, t * per_type + c));
  }

  OracleOutput out;
  out.dv = dv;
  out.paths = LossPaths(steps, dt, types, r);
  out.mass.assign(types, std::vector<double>(static_cast<std::size_t>(steps) + 1));
  out.min_intensity = std::numeric_limits<double>::infinity();
  double x = config.risk.x0;

  for (int k = 0;; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    std::vector<double> q(r, 0.0);
    double d = 0.0;
    for (std::size_t t = 0; t < types; ++t) {
      double w = 0.0, lw = 0.0;
      for (std::size_t p = 0; p < m; ++p) {
        w += weight[t][p];
        lw += lambda[t][p] * weight[t][p];
      }
      out.mass[t][ks] = w / static_cast<double>(m);
      d += config.types[t].weight * (1.0 - out.mass[t][ks]);
      out.paths.D_by_type[t][ks] = 1.0 - out.mass[t][ks];
      for (std::size_t j = 0; j < r; ++j) q[j] += config.types[t].weight * config.types[t].ell[j] * lw / static_cast<double>(m);
    }
    out.paths.D[ks] = d;
    for (std::size_t j = 0; j < r; ++j) {
      double l = 0.0;
      for (std::size_t t = 0; t < types; ++t) l += config.types[t].weight * config.types[t].ell[j] * (1.0 - out.mass[t][ks]);
      out.paths.L[j][ks] = l;
    }
    for (std::size_t t = 0; t < types; ++t) {
      double v = 0.0;
      for (std::size_t j = 0; j < r; ++j) v += config.types[t].beta_c[j] * out.paths.L[j][ks];
      out.paths.Q_by_type[t][ks] = v;
    }
    out.paths.X[ks] = x;
    out.coupling.push_back(q);
    if (k == steps) break;

    const double inc = config.risk.drift(x) * dt + config.risk.vol(x) * dv[ks];
    for (std::size_t t = 0; t < types; ++t) {
      const NameType& type = config.types[t];
      double contagion = 0.0;
      for (std::size_t j = 0; j < r; ++j) contagion += type.beta_c[j] * q[j];
      for (std::size_t p = 0; p < m; ++p) {
        const std::size_t g = t * per_type + p / options.chunk;
        const double lam = lambda[t][p];
        hazard[t][p] += lam * dt;
        const double w = std::exp(-hazard[t][p]);
        out.weights_monotone = out.weights_monotone && w <= weight[t][p];
        weight[t][p] = w;
        const double z = normals[g](streams[g]);
        const double next = lam + drift_value(type.drift, lam) * dt +
                            type.sigma * diffusion_power(lam, type.rho) * std::sqrt(dt) * z +
                            type.beta_s * lam * inc + contagion * dt;
        if (!(std::abs(next) <= options.blowup_guard)) throw NumericalBlowup("oracle intensity exceeded the guard");
        lambda[t][p] = std::max(next, 0.0);
        out.min_intensity = std::min(out.min_intensity, lambda[t][p]);
      }
    }
    x = std::max(x + inc, 0.0);
  }
  return out;
}

}  // namespace dclust::reference
