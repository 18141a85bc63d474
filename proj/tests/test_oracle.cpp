#include <catch2/catch_amalgamated.hpp>

#include "dclust/errors.hpp"
#include "dclust/meanfield.hpp"
#include "dclust/oracle.hpp"
#include "dclust/reference/serial.hpp"
#include "dclust/rng.hpp"
#include "dclust/scenarios.hpp"
#include "test_configs.hpp"

#include <json.hpp>

#include <cmath>
#include <random>

using namespace dclust;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Noise-free type with lambda0 = lambda_bar and mean reversion alpha_bar.
ScenarioConfig deterministic(double beta_c, double ell) {
  auto c = testcfg::frozen(0.3);
  c.types[0].drift = AffineDrift{2.0, 0.3};
  c.types[0].beta_c = {beta_c};
  c.types[0].ell = {ell};
  c.risk.eps = 0.0;
  return c;
}

OracleOptions small(std::size_t m, std::size_t chunk = 1024) {
  OracleOptions o;
  o.particles = m;
  o.chunk = chunk;
  return o;
}

}  // namespace

TEST_CASE("noise-free cloud without contagion is a killed exponential", "[oracle]") {
  const auto cfg = deterministic(0.0, 0.0);
  const auto out = mv_solve(cfg, 3, small(10));
  const double dt = cfg.controls.dt;
  for (std::size_t k = 0; k < out.paths.points(); ++k) {
    CHECK_THAT(out.mass[0][k], WithinRel(std::exp(-0.3 * dt * static_cast<double>(k)), 1e-12));
    CHECK_THAT(out.paths.D[k], WithinAbs(1.0 - std::exp(-0.3 * dt * static_cast<double>(k)), 1e-12));
  }
  CHECK(out.min_intensity == 0.3);
}

TEST_CASE("noise-free cloud with contagion matches a hand Euler integration", "[oracle]") {
  const double beta = 1.5, ell = 0.4;
  const auto cfg = deterministic(beta, ell);
  const auto out = mv_solve(cfg, 3, small(7));
  const double dt = cfg.controls.dt;
  double lam = 0.3, hazard = 0.0;
  for (int k = 0; k <= cfg.controls.steps(); ++k) {
    const double w = std::exp(-hazard);
    const double q = ell * lam * w;
    const double loss = ell * (1.0 - w);
    CHECK_THAT(out.mass[0][k], WithinRel(w, 1e-12));
    CHECK_THAT(out.coupling[k][0], WithinRel(q, 1e-12));
    CHECK_THAT(out.paths.L[0][k], WithinAbs(loss, 1e-14));
    CHECK_THAT(out.paths.Q_by_type[0][k], WithinAbs(beta * loss, 1e-14));
    hazard += lam * dt;
    lam = std::max(0.0, lam - 2.0 * (lam - 0.3) * dt + beta * q * dt);
  }
}

TEST_CASE("without contagion each chunk integrates its own stream", "[oracle]") {
  auto cfg = builtin_scenario("one_cluster");
  for (auto& t : cfg.types) t.beta_c = {0.0};
  const std::size_t m = 10, chunk = 4, per_type = 3;
  const auto out = mv_solve(cfg, 77, small(m, chunk));

  const int steps = cfg.controls.steps();
  const double dt = cfg.controls.dt;
  const auto dv = common_noise(77, steps, dt);
  for (std::size_t t = 0; t < cfg.types.size(); ++t) {
    const auto& type = cfg.types[t];
    const auto affine = std::get<AffineDrift>(type.drift);
    std::vector<double> lam(m, type.lambda0), hazard(m, 0.0);
    std::vector<double> mass(static_cast<std::size_t>(steps) + 1, 0.0);
    mass[0] = 1.0;
    std::vector<Engine> streams;
    std::vector<std::normal_distribution<double>> normals(per_type);
    for (std::size_t c = 0; c < per_type; ++c) streams.push_back(make_stream(77, StreamKind::OracleChunk, t * per_type + c));
    double x = cfg.risk.x0;
    for (int k = 0; k < steps; ++k) {
      const double dx = cfg.risk.kappa * (cfg.risk.theta - x) * dt + cfg.risk.eps * std::sqrt(x) * dv[k];
      double sum = 0.0;
      for (std::size_t p = 0; p < m; ++p) {
        const std::size_t c = p / chunk;
        hazard[p] += lam[p] * dt;
        sum += std::exp(-hazard[p]);
        const double z = normals[c](streams[c]);
        const double next = lam[p] - affine.alpha_bar * (lam[p] - affine.lambda_bar) * dt +
                            type.sigma * std::sqrt(lam[p]) * std::sqrt(dt) * z + type.beta_s * lam[p] * dx;
        lam[p] = std::max(0.0, next);
      }
      mass[k + 1] = sum / static_cast<double>(m);
      x = std::max(0.0, x + dx);
    }
    for (int k = 0; k <= steps; ++k) CHECK_THAT(out.mass[t][k], WithinAbs(mass[k], 1e-13));
  }
}

TEST_CASE("weights are monotone and mass stays in (0, 1]", "[oracle][invariant]") {
  for (const auto& name : {"one_cluster", "core_periphery_two"}) {
    const auto out = mv_solve(builtin_scenario(name), 11, small(2000, 256));
    CHECK(out.weights_monotone);
    CHECK(out.min_intensity >= 0.0);
    for (const auto& m : out.mass)
      for (std::size_t k = 0; k < m.size(); ++k) {
        CHECK(m[k] > 0.0);
        CHECK(m[k] <= 1.0);
        if (k > 0) CHECK(m[k] <= m[k - 1]);
      }
  }
}

TEST_CASE("oracle and moment solver agree on the noise-free case", "[oracle][meanfield]") {
  auto cfg = deterministic(1.5, 0.4);
  cfg.types[0].sigma = 0.0;
  const auto o = mv_solve(cfg, 1, small(100000));
  const auto mf = solve_trial(cfg, 1);
  for (std::size_t k = 0; k < o.paths.points(); ++k) CHECK_THAT(o.paths.D[k], WithinAbs(mf.paths.D[k], 1e-3));
}

TEST_CASE("oracle and moment solver agree on one stochastic trial", "[oracle][meanfield]") {
  const auto cfg = builtin_scenario("one_cluster");
  const auto seed = trial_seed(cfg.controls.seed, 0);
  const auto o = mv_solve(cfg, seed, small(20000));
  const auto mf = solve_trial(cfg, seed);
  double sup = 0.0;
  for (std::size_t k = 0; k < o.paths.points(); ++k) sup = std::max(sup, std::abs(o.paths.D[k] - mf.paths.D[k]));
  CHECK(sup <= 5e-3);
}

TEST_CASE("parallel oracle matches the serial reference", "[oracle]") {
  const auto cfg = builtin_scenario("two_cluster");
  auto opts = small(3000, 512);
  opts.exec.threads = 4;
  const auto par = mv_solve(cfg, 21, opts);
  const auto ser = reference::mv_solve_serial(cfg, 21, opts);
  for (std::size_t k = 0; k < par.paths.points(); ++k) {
    CHECK_THAT(par.paths.D[k], WithinAbs(ser.paths.D[k], 1e-12));
    for (std::size_t t = 0; t < cfg.types.size(); ++t) CHECK_THAT(par.mass[t][k], WithinAbs(ser.mass[t][k], 1e-12));
  }
}

TEST_CASE("oracle output does not depend on thread count", "[oracle][invariant]") {
  const auto cfg = builtin_scenario("core_periphery_one");
  auto one = small(3000, 256), four = one;
  one.exec.threads = 1;
  four.exec.threads = 4;
  const auto a = mv_solve(cfg, 5, one);
  const auto b = mv_solve(cfg, 5, four);
  CHECK(a.paths == b.paths);
  CHECK(a.mass == b.mass);
}

TEST_CASE("Picard iteration settles in two passes without contagion", "[oracle]") {
  auto cfg = builtin_scenario("one_cluster");
  for (auto& t : cfg.types) t.beta_c = {0.0};
  auto opts = small(2000, 256);
  opts.picard_iterations = 5;
  const auto out = mv_solve(cfg, 9, opts);
  CHECK(out.picard_iterations == 2);
  CHECK(out.picard_residual == 0.0);
  CHECK(out.picard_gap == 0.0);
}

TEST_CASE("Picard iteration converges with contagion", "[oracle]") {
  const auto cfg = builtin_scenario("one_cluster");
  auto opts = small(2000, 256);
  opts.picard_iterations = 5;
  const auto out = mv_solve(cfg, 9, opts);
  CHECK(out.picard_iterations <= 5);
  CHECK(out.picard_residual < 1e-6);
  CHECK(out.picard_gap < 1e-4);
}

TEST_CASE("oracle accepts dynamics the moment solver cannot handle", "[oracle]") {
  auto cfg = builtin_scenario("one_cluster");
  cfg.types[0].drift = PolynomialDrift{{0.8, -4.0, -0.5}};
  cfg.types[1].rho = 0.75;
  CHECK_FALSE(moment_solver_supports(cfg));
  const auto out = mv_solve(cfg, 4, small(1000, 256));
  CHECK(out.min_intensity >= 0.0);
  CHECK(out.paths.D.back() > 0.0);
  CHECK(out.paths.D.back() < 1.0);
}

TEST_CASE("oracle rejects bad options", "[oracle]") {
  const auto cfg = builtin_scenario("one_cluster");
  CHECK_THROWS_AS(mv_solve(cfg, 1, small(0)), MalformedConfig);
  CHECK_THROWS_AS(mv_solve(cfg, 1, small(10, 0)), MalformedConfig);
  const std::vector<double> short_dv(5, 0.0);
  CHECK_THROWS_AS(mv_solve(cfg, 1, short_dv, small(10)), MalformedConfig);
  auto guard = small(100);
  guard.blowup_guard = 0.25;
  CHECK_THROWS_AS(mv_solve(cfg, 1, guard), NumericalBlowup);
}

TEST_CASE("a single LLN level has no slope", "[lln]") {
  auto cfg = builtin_scenario("one_cluster");
  LlnOptions opts;
  opts.trials = 10;
  const std::vector<std::int64_t> n{200};
  const auto rep = lln_harness(cfg, n, opts);
  REQUIRE(rep.levels.size() == 1);
  CHECK(rep.slope == 0.0);
  CHECK(rep.monotone);
  CHECK(rep.reference == "meanfield");
  CHECK(rep.levels[0].rms_error >= rep.levels[0].mean_abs_error);
}

TEST_CASE("independent names give binomial LLN errors", "[lln]") {
  auto cfg = testcfg::frozen(0.5);
  cfg.controls.dt = 0.05;
  const double lambda = 0.5;
  LlnOptions opts;
  opts.trials = 1500;
  const std::vector<std::int64_t> n{50, 200, 800};
  const auto rep = lln_harness(cfg, n, opts);
  const double p = 1.0 - std::exp(-lambda * cfg.controls.t_end);
  const double limit = solve_trial(cfg, 1).paths.D.back();
  for (const auto& level : rep.levels) {
    const double expected = std::sqrt(p * (1.0 - p) / static_cast<double>(level.pool_size) + (p - limit) * (p - limit));
    INFO(level.pool_size);
    CHECK_THAT(level.rms_error, WithinRel(expected, 0.08));
  }
  CHECK(rep.monotone);
  CHECK(rep.slope < -0.4);
  CHECK(rep.slope > -0.6);
}

TEST_CASE("LLN harness validates its inputs", "[lln]") {
  const auto cfg = builtin_scenario("one_cluster");
  const std::vector<std::int64_t> down{500, 250}, empty{}, zero{0, 10};
  CHECK_THROWS_AS(lln_harness(cfg, down), MalformedConfig);
  CHECK_THROWS_AS(lln_harness(cfg, empty), MalformedConfig);
  CHECK_THROWS_AS(lln_harness(cfg, zero), MalformedConfig);
  LlnOptions none;
  none.trials = 0;
  const std::vector<std::int64_t> ok{10};
  CHECK_THROWS_AS(lln_harness(cfg, ok, none), MalformedConfig);
}

TEST_CASE("LLN report serialises levels and slope", "[lln]") {
  LlnReport rep;
  rep.levels.push_back({250, 0.02, 0.015, 0.001, 10});
  rep.slope = -0.5;
  rep.reference = "oracle";
  const auto doc = nlohmann::json::parse(to_json(rep));
  CHECK(doc["reference"] == "oracle");
  CHECK(doc["levels"][0]["N"] == 250);
  CHECK(doc["slope"] == -0.5);
}
