#include <catch2/catch_amalgamated.hpp>

#include "dclust/errors.hpp"
#include "dclust/meanfield.hpp"
#include "dclust/rng.hpp"
#include "dclust/scenarios.hpp"
#include "test_configs.hpp"

#include <algorithm>
#include <cmath>

using namespace dclust;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("coupling at birth of the one-cluster scenario", "[meanfield]") {
  const auto cfg = builtin_scenario("one_cluster");
  const auto q = coupling_Q(initial_state(cfg), cfg);
  REQUIRE(q.size() == 1);
  CHECK_THAT(q[0], WithinAbs(0.0316 * 0.2, 1e-15));
}

TEST_CASE("coupling vanishes without loss factors", "[meanfield]") {
  auto cfg = builtin_scenario("two_cluster");
  for (auto& t : cfg.types) std::fill(t.ell.begin(), t.ell.end(), 0.0);
  MomentState s = initial_state(cfg);
  for (double& v : s.u) v = 0.7;
  for (double v : coupling_Q(s, cfg)) CHECK(v == 0.0);
}

TEST_CASE("coupling is the weighted first moment", "[meanfield]") {
  auto cfg = builtin_scenario("one_cluster");
  cfg.types[0].weight = 0.3;
  cfg.types[1].weight = 0.7;
  cfg.types[0].ell = {0.05};
  cfg.types[1].ell = {-0.02};
  MomentState s = initial_state(cfg);
  s.at(0, 1) = 0.4;
  s.at(1, 1) = 0.9;
  CHECK_THAT(coupling_Q(s, cfg)[0], WithinAbs(0.3 * 0.05 * 0.4 + 0.7 * -0.02 * 0.9, 1e-16));
}

TEST_CASE("point-mass initial state has moments lambda0^k", "[meanfield]") {
  const auto cfg = builtin_scenario("one_cluster");
  const auto s = initial_state(cfg);
  CHECK(s.cap == 20);
  CHECK(s.x == 0.2);
  for (std::size_t i = 0; i < 2; ++i)
    for (int k = 0; k <= 20; ++k) CHECK_THAT(s.at(i, k), WithinRel(std::pow(0.2, k), 1e-14));
}

TEST_CASE("u_0 row is u_0 - u_1 dt", "[meanfield]") {
  const auto cfg = builtin_scenario("one_cluster");
  const auto s = initial_state(cfg);
  const auto n = step_moments(s, cfg, 0.037, 0.01);
  for (std::size_t i = 0; i < 2; ++i) CHECK(n.at(i, 0) == s.at(i, 0) - s.at(i, 1) * 0.01);
}

TEST_CASE("one Euler step matches the hand-expanded k = 1, 2 equations", "[meanfield]") {
  const auto cfg = builtin_scenario("one_cluster");
  MomentState s = initial_state(cfg);
  s.x = 0.35;
  // Perturb the state so every term contributes.
  s.at(0, 1) = 0.21;
  s.at(0, 2) = 0.05;
  s.at(0, 3) = 0.013;
  s.at(1, 0) = 0.97;
  s.at(1, 1) = 0.18;
  const double dt = 0.01, dv = -0.042;
  const auto n = step_moments(s, cfg, dv, dt);

  // kappa = 4, theta = 0.5, eps = 0.5; sigma = 0.9, alpha = 4, lambda_bar = 0.2, beta_S = 2.
  const double b0 = 4.0 * (0.5 - 0.35);
  const double s0 = 0.5 * std::sqrt(0.35);
  const double q = 0.5 * 0.0316 * 0.21 + 0.5 * 0.0316 * 0.18;
  const double beta = 1.2361;
  const double u0 = 1.0, u1 = 0.21, u2 = 0.05, u3 = 0.013;
  const double du1 = ((-4.0 + 2.0 * b0) * u1 + (4.0 * 0.2 + beta * q) * u0 - u2) * dt + 2.0 * s0 * u1 * dv;
  const double du2 = (2.0 * (-4.0 + 2.0 * b0) * u2 + 4.0 * s0 * s0 * u2 + (0.81 + 2.0 * 4.0 * 0.2 + 2.0 * beta * q) * u1 -
                      u3) * dt +
                     2.0 * 2.0 * s0 * u2 * dv;
  CHECK_THAT(n.at(0, 1), WithinAbs(u1 + du1, 1e-15));
  CHECK_THAT(n.at(0, 2), WithinAbs(u2 + du2, 1e-15));
  CHECK_THAT(n.x, WithinAbs(std::max(0.0, 0.35 + b0 * dt + s0 * dv), 1e-15));
}

TEST_CASE("closure rules differ only in the top equation", "[meanfield]") {
  auto cfg = builtin_scenario("one_cluster");
  const auto s = initial_state(cfg);
  const auto copy = step_moments(s, cfg, 0.01, 0.01);
  cfg.controls.closure = ClosureRule::Zero;
  const auto zero = step_moments(s, cfg, 0.01, 0.01);
  for (std::size_t i = 0; i < 2; ++i) {
    for (int k = 0; k < 20; ++k) CHECK(copy.at(i, k) == zero.at(i, k));
    CHECK_THAT(zero.at(i, 20) - copy.at(i, 20), WithinAbs(s.at(i, 20) * 0.01, 1e-20));
  }
}

TEST_CASE("closure choice does not move D_T at K = 20", "[meanfield]") {
  auto cfg = builtin_scenario("one_cluster");
  cfg.controls.trials = 300;
  const auto copy = solve_ensemble(cfg);
  cfg.controls.closure = ClosureRule::Zero;
  const auto zero = solve_ensemble(cfg);
  for (std::size_t t = 0; t < copy.final_loss.size(); ++t)
    CHECK_THAT(copy.final_loss[t], WithinAbs(zero.final_loss[t], 1e-3));
}

TEST_CASE("the moment solver rejects unsupported dynamics", "[meanfield]") {
  auto cfg = builtin_scenario("one_cluster");
  cfg.types[1].rho = 0.75;
  CHECK_FALSE(moment_solver_supports(cfg));
  CHECK_THROWS_AS(solve_trial(cfg, 1), UnsupportedConfig);
  cfg = builtin_scenario("one_cluster");
  cfg.types[0].drift = PolynomialDrift{{1.0, -1.0}};
  CHECK_THROWS_AS(step_moments(initial_state(cfg), cfg, 0.0, 0.01), UnsupportedConfig);
}

TEST_CASE("loss paths start at zero and are recomputable from u_0", "[meanfield]") {
  const auto cfg = builtin_scenario("two_cluster");
  const auto out = solve_trial(cfg, trial_seed(1, 0));
  CHECK(out.paths.D[0] == 0.0);
  for (const auto& l : out.paths.L) CHECK(l[0] == 0.0);
  for (std::size_t k = 0; k < out.paths.points(); ++k) {
    double survived = 0.0;
    for (std::size_t i = 0; i < cfg.types.size(); ++i) survived += cfg.types[i].weight * out.u0[i][k];
    CHECK_THAT(out.paths.D[k], WithinAbs(1.0 - survived, 1e-12));
    for (std::size_t j = 0; j < 2; ++j) {
      double bar = 0.0, l = 0.0;
      for (std::size_t i = 0; i < cfg.types.size(); ++i) {
        bar += cfg.types[i].weight * cfg.types[i].ell[j];
        l += cfg.types[i].weight * cfg.types[i].ell[j] * out.u0[i][k];
      }
      CHECK_THAT(out.paths.L[j][k], WithinAbs(bar - l, 1e-12));
    }
  }
}

TEST_CASE("u_0 stays a nonincreasing subprobability on every path", "[meanfield][invariant]") {
  for (const auto& name : scenario_names()) {
    auto cfg = builtin_scenario(name);
    cfg.controls.trials = 100;
    EnsembleOptions opts;
    std::size_t bad = 0;
    for_each_trial(cfg, opts, [&](std::int64_t, const TrialOutput& t) {
      for (const auto& u0 : t.u0)
        for (std::size_t k = 0; k < u0.size(); ++k) {
          if (u0[k] < -1e-6 || u0[k] > 1.0 + 1e-6) ++bad;
          if (k > 0 && u0[k] > u0[k - 1] + 1e-6) ++bad;
        }
    });
    INFO(name);
    CHECK(bad == 0);
  }
}

TEST_CASE("Q ordering holds path by path for the one-cluster scenario", "[meanfield]") {
  auto cfg = builtin_scenario("one_cluster");
  cfg.controls.trials = 500;
  std::size_t violations = 0;
  for_each_trial(cfg, {}, [&](std::int64_t, const TrialOutput& t) {
    for (std::size_t k = 0; k < t.paths.points(); ++k)
      if (t.paths.Q_by_type[0][k] < t.paths.Q_by_type[1][k]) ++violations;
  });
  CHECK(violations == 0);
  CHECK(solve_ensemble(cfg).order_violations == 0);
}

TEST_CASE("one trial ensemble equals the single trial", "[meanfield]") {
  auto cfg = builtin_scenario("one_cluster");
  cfg.controls.trials = 1;
  const auto ens = solve_ensemble(cfg);
  const auto one = solve_trial(cfg, trial_seed(cfg.controls.seed, 0));
  CHECK(ens.mean == one.paths);
  CHECK(ens.var_final_loss == 0.0);
}

TEST_CASE("without common noise every trial is identical", "[meanfield]") {
  auto cfg = builtin_scenario("one_cluster");
  cfg.risk.eps = 0.0;
  cfg.controls.trials = 50;
  const auto ens = solve_ensemble(cfg);
  CHECK_THAT(ens.var_final_loss, WithinAbs(0.0, 1e-30));
  CHECK(std::all_of(ens.final_loss.begin(), ens.final_loss.end(), [&](double v) { return v == ens.final_loss[0]; }));
}

TEST_CASE("permuting the types leaves the outputs invariant", "[meanfield]") {
  auto cfg = builtin_scenario("two_cluster");
  auto rev = cfg;
  std::reverse(rev.types.begin(), rev.types.end());
  const auto a = solve_trial(cfg, 5);
  const auto b = solve_trial(rev, 5);
  const std::size_t n = cfg.types.size();
  for (std::size_t k = 0; k < a.paths.points(); ++k) {
    CHECK_THAT(a.paths.D[k], WithinAbs(b.paths.D[k], 1e-14));
    for (std::size_t i = 0; i < n; ++i)
      CHECK_THAT(a.paths.Q_by_type[i][k], WithinAbs(b.paths.Q_by_type[n - 1 - i][k], 1e-14));
  }
}

TEST_CASE("ensemble output does not depend on thread count or block size", "[meanfield][invariant]") {
  auto cfg = builtin_scenario("core_periphery_two");
  cfg.controls.trials = 150;
  EnsembleOptions one, four;
  one.exec.threads = 1;
  four.exec.threads = 4;
  four.block = 7;
  const auto a = solve_ensemble(cfg, one);
  const auto b = solve_ensemble(cfg, four);
  CHECK(a.mean == b.mean);
  CHECK(a.final_loss == b.final_loss);
  CHECK(a.histogram.counts == b.histogram.counts);
}

TEST_CASE("higher contagion loads default more", "[meanfield]") {
  const auto cfg = builtin_scenario("one_cluster");
  const auto ens = solve_ensemble(cfg);
  double p1 = 0.0, p2 = 0.0;
  for (double v : ens.final_loss_by_type[0]) p1 += v;
  for (double v : ens.final_loss_by_type[1]) p2 += v;
  CHECK(p1 > p2);
  CHECK(ens.mean.D_by_type[0].back() > ens.mean.D_by_type[1].back());
}

TEST_CASE("histogram covers all trials", "[meanfield]") {
  const std::vector<double> v{0.1, 0.2, 0.2, 0.4};
  const auto h = make_histogram(v, 3);
  CHECK(h.lo == 0.1);
  CHECK(h.hi == 0.4);
  CHECK(h.counts == std::vector<std::size_t>{1, 2, 1});
  CHECK(h.bin_right(2) == 0.4);
  const auto flat = make_histogram(std::vector<double>{0.3, 0.3}, 4);
  CHECK(flat.counts[0] == 2);
  CHECK_THROWS_AS(make_histogram(v, 0), MalformedConfig);
}

TEST_CASE("reduce_rank merges types that become identical", "[meanfield]") {
  const auto reduced = reduce_rank(builtin_scenario("two_cluster"), 1);
  REQUIRE(reduced.types.size() == 2);
  CHECK(reduced.rank() == 1);
  CHECK(reduced.types[0].beta_c[0] == 0.2050);
  CHECK(reduced.types[1].beta_c[0] == 0.3980);
  CHECK_THAT(reduced.types[0].weight, WithinAbs(0.5, 1e-15));
  CHECK(validate(reduced).ok());
  CHECK(reduced == builtin_scenario("two_cluster_rank1"));
  CHECK_THROWS_AS(reduce_rank(builtin_scenario("two_cluster"), 3), RankOutOfRange);
}

TEST_CASE("comparing a scenario with itself gives zero percent error", "[meanfield]") {
  auto cfg = builtin_scenario("two_cluster");
  cfg.controls.trials = 40;
  const auto rep = compare_lowrank(cfg, cfg);
  CHECK(rep.max_mean_pe == 0.0);
  CHECK(rep.max_abs_mean_D_diff == 0.0);
  for (std::size_t i = 0; i < rep.type_map.size(); ++i) CHECK(rep.type_map[i] == i);
}

TEST_CASE("compare needs matching controls and counterpart types", "[meanfield]") {
  auto full = builtin_scenario("two_cluster");
  auto reduced = builtin_scenario("two_cluster_rank1");
  reduced.controls.seed += 1;
  CHECK_THROWS_AS(compare_lowrank(full, reduced), MalformedConfig);
  reduced = builtin_scenario("two_cluster_rank1");
  reduced.types[0].beta_c[0] = 0.3;
  CHECK_THROWS_AS(compare_lowrank(full, reduced), MalformedConfig);
}

TEST_CASE("two-cluster reduction is practically indistinguishable", "[meanfield]") {
  auto full = builtin_scenario("two_cluster");
  auto reduced = builtin_scenario("two_cluster_rank1");
  full.controls.trials = reduced.controls.trials = 200;
  const auto rep = compare_lowrank(full, reduced);
  CHECK(rep.max_abs_mean_D_diff <= 5e-3);
  REQUIRE(rep.type_map.size() == 4);
  CHECK(rep.type_map[0] == 0);
  CHECK(rep.type_map[2] == 1);
}

TEST_CASE("a tiny guard turns moment growth into NumericalBlowup", "[meanfield]") {
  const auto cfg = builtin_scenario("one_cluster");
  MomentOptions opts;
  opts.blowup_guard = 0.5;
  CHECK_THROWS_AS(solve_trial(cfg, 1, opts), NumericalBlowup);
}
