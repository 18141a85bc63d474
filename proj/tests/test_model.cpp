#include <catch2/catch_amalgamated.hpp>

#include "dclust/errors.hpp"
#include "dclust/model.hpp"
#include "dclust/rng.hpp"
#include "dclust/scenarios.hpp"
#include "test_configs.hpp"

#include <cmath>
#include <json.hpp>

#include <set>

using namespace dclust;
using Catch::Matchers::WithinAbs;

namespace {

const CheckResult& find_check(const ValidationReport& r, const std::string& id) {
  for (const auto& c : r.checks)
    if (c.id == id) return c;
  FAIL("no check " << id);
  throw;
}

}  // namespace

TEST_CASE("one-cluster config passes validation", "[model]") {
  const auto cfg = builtin_scenario("one_cluster");
  const auto report = validate(cfg);
  CHECK(report.ok());
  CHECK(find_check(report, "model.sigma_lower").status == CheckStatus::Pass);
  CHECK(find_check(report, "model.drift").status == CheckStatus::Pass);
  CHECK(find_check(report, "risk.feller").status == CheckStatus::Pass);
  CHECK(find_check(report, "model.factor_moments").status == CheckStatus::Assumed);
  CHECK_NOTHROW(require_valid(cfg));
}

TEST_CASE("every built-in scenario validates", "[model]") {
  for (const auto& name : scenario_names()) {
    INFO(name);
    CHECK(validate(builtin_scenario(name)).ok());
  }
}

TEST_CASE("zero idiosyncratic volatility fails the sigma lower bound", "[model]") {
  auto cfg = builtin_scenario("one_cluster");
  cfg.types[0].sigma = 0.0;
  const auto report = validate(cfg);
  CHECK_FALSE(report.ok());
  CHECK(find_check(report, "model.sigma_lower").status == CheckStatus::Fail);
  CHECK_THROWS_AS(require_valid(cfg), AssumptionViolation);
}

TEST_CASE("coefficients above K_bdd fail boundedness", "[model]") {
  auto cfg = builtin_scenario("one_cluster");
  cfg.types[1].beta_c[0] = 150.0;
  CHECK(find_check(validate(cfg), "model.bounded").status == CheckStatus::Fail);
  cfg.bounds.k_bdd = 200.0;
  CHECK(find_check(validate(cfg), "model.bounded").status == CheckStatus::Pass);
}

TEST_CASE("rho outside [1/2, 1) fails", "[model]") {
  auto cfg = builtin_scenario("one_cluster");
  cfg.types[0].rho = 1.0;
  CHECK(find_check(validate(cfg), "model.rho").status == CheckStatus::Fail);
  cfg.types[0].rho = 0.4;
  CHECK(find_check(validate(cfg), "model.rho").status == CheckStatus::Fail);
  cfg.types[0].rho = 0.75;
  CHECK(find_check(validate(cfg), "model.rho").status == CheckStatus::Pass);
}

TEST_CASE("polynomial drift admissibility", "[model]") {
  auto cfg = builtin_scenario("one_cluster");
  SECTION("b = 1 - lambda^3 is dissipative") {
    cfg.types[0].drift = PolynomialDrift{{1.0, 0.0, 0.0, -1.0}};
    CHECK(dissipative_on_grid(cfg.types[0].drift, 2.0));
    CHECK(find_check(validate(cfg), "model.drift").status == CheckStatus::Pass);
  }
  SECTION("growing drift fails") {
    cfg.types[0].drift = PolynomialDrift{{1.0, 1.0}};
    CHECK_FALSE(dissipative_on_grid(cfg.types[0].drift, 2.0));
    CHECK(find_check(validate(cfg), "model.drift").status == CheckStatus::Fail);
  }
  SECTION("b(0) must be positive") {
    cfg.types[0].drift = PolynomialDrift{{0.0, -1.0}};
    CHECK(find_check(validate(cfg), "model.drift").status == CheckStatus::Fail);
  }
  SECTION("even degree with negative leading coefficient passes on lambda >= 0") {
    cfg.types[0].drift = PolynomialDrift{{0.5, 0.0, -2.0}};
    CHECK(find_check(validate(cfg), "model.drift").status == CheckStatus::Pass);
  }
  SECTION("degree zero is malformed") {
    cfg.types[0].drift = PolynomialDrift{{1.0}};
    CHECK_THROWS_AS(validate(cfg), MalformedConfig);
  }
}

TEST_CASE("affine drift with alpha_bar > 0 always passes the sampler", "[model]") {
  for (double alpha : {1e-6, 0.5, 4.0, 99.0})
    for (double level : {0.0, 0.2, 10.0, 1e3}) {
      INFO(alpha << " " << level);
      // The grid starts above lambda_bar for these K, where lambda * b(lambda) < 0.
      CHECK(dissipative_on_grid(AffineDrift{alpha, level}, 2.0 * level + 1.0));
    }
  auto cfg = builtin_scenario("one_cluster");
  cfg.types[0].drift = AffineDrift{1e-3, 50.0};
  CHECK(find_check(validate(cfg), "model.drift").status == CheckStatus::Pass);
  cfg.types[0].drift = AffineDrift{0.0, 0.2};
  CHECK(find_check(validate(cfg), "model.drift").status == CheckStatus::Fail);
}

TEST_CASE("weights must sum to one", "[model]") {
  auto cfg = builtin_scenario("one_cluster");
  cfg.types[0].weight = 0.6;
  CHECK(find_check(validate(cfg), "model.weights").status == CheckStatus::Fail);
}

TEST_CASE("Feller violation is a warning, not a failure", "[model]") {
  auto cfg = builtin_scenario("one_cluster");
  cfg.risk.eps = 3.0;
  const auto report = validate(cfg);
  CHECK(report.ok());
  CHECK(find_check(report, "risk.feller").status == CheckStatus::Warning);
  cfg.risk.kappa = 0.0;
  CHECK(find_check(validate(cfg), "risk.params").status == CheckStatus::Fail);
}

TEST_CASE("structural errors are MalformedConfig", "[model]") {
  auto base = builtin_scenario("one_cluster");
  auto cfg = base;
  cfg.types[1].beta_c.push_back(0.1);
  CHECK_THROWS_AS(validate(cfg), MalformedConfig);
  cfg = base;
  cfg.types[0].ell.clear();
  CHECK_THROWS_AS(validate(cfg), MalformedConfig);
  cfg = base;
  cfg.controls.dt = 0.0;
  CHECK_THROWS_AS(validate(cfg), MalformedConfig);
  cfg = base;
  cfg.controls.dt = -0.01;
  CHECK_THROWS_AS(validate(cfg), MalformedConfig);
  cfg = base;
  cfg.controls.dt = 0.03;
  CHECK_THROWS_AS(validate(cfg), MalformedConfig);
  cfg = base;
  cfg.controls.moment_cap = 1;
  CHECK_THROWS_AS(validate(cfg), MalformedConfig);
  cfg = base;
  cfg.controls.trials = 0;
  CHECK_THROWS_AS(validate(cfg), MalformedConfig);
  cfg = base;
  cfg.types.clear();
  CHECK_THROWS_AS(validate(cfg), MalformedConfig);
  cfg = base;
  cfg.types[0].sigma = std::nan("");
  CHECK_THROWS_AS(validate(cfg), MalformedConfig);
  cfg = base;
  cfg.types[0].weight = 0.0;
  CHECK_THROWS_AS(validate(cfg), MalformedConfig);
}

TEST_CASE("steps tolerate representation error in t_end / dt", "[model]") {
  SolverControls c;
  c.t_end = 1.0;
  c.dt = 0.01;
  CHECK(c.steps() == 100);
  c.t_end = 0.3;
  c.dt = 0.1;
  CHECK(c.steps() == 3);
}

TEST_CASE("validate is pure", "[model]") {
  const auto cfg = builtin_scenario("two_cluster");
  const auto a = validate(cfg);
  const auto b = validate(cfg);
  REQUIRE(a.checks.size() == b.checks.size());
  for (std::size_t i = 0; i < a.checks.size(); ++i) {
    CHECK(a.checks[i].id == b.checks[i].id);
    CHECK(a.checks[i].status == b.checks[i].status);
    CHECK(a.checks[i].detail == b.checks[i].detail);
  }
}

TEST_CASE("type measure atoms", "[model]") {
  SECTION("two equal types") {
    const auto atoms = type_measure(builtin_scenario("one_cluster"));
    REQUIRE(atoms.size() == 2);
    CHECK(atoms[0].mass == 0.5);
    CHECK(atoms[1].mass == 0.5);
  }
  SECTION("single type") {
    const auto atoms = type_measure(testcfg::frozen(1.0));
    REQUIRE(atoms.size() == 1);
    CHECK(atoms[0].mass == 1.0);
  }
  SECTION("core-periphery cluster-1 grouping") {
    const auto cfg = builtin_scenario("core_periphery_one");
    const auto atoms = type_measure(cfg);
    const double expected[] = {0.70, 0.13, 0.14, 0.01, 0.01, 0.01};
    REQUIRE(atoms.size() == 6);
    double total = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK_THAT(atoms[i].mass, WithinAbs(expected[i], 1e-15));
      total += atoms[i].mass;
    }
    CHECK_THAT(total, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("config JSON round trip is byte identical", "[model]") {
  std::vector<ScenarioConfig> configs;
  for (const auto& name : scenario_names()) configs.push_back(builtin_scenario(name));
  auto poly = builtin_scenario("one_cluster");
  poly.types[0].drift = PolynomialDrift{{1.0, 0.0, 0.0, -1.0}};
  poly.types[1].rho = 0.75;
  poly.controls.closure = ClosureRule::Zero;
  poly.controls.seed = 0xfedcba9876543210ULL;
  poly.types[0].beta_s = 0.1 + 0.2;  // not representable in short decimal
  configs.push_back(poly);
  for (const auto& cfg : configs) {
    const auto text = to_json(cfg);
    const auto back = config_from_json(text);
    CHECK(back == cfg);
    CHECK(to_json(back) == text);
  }
}

TEST_CASE("config JSON rejects unknown keys and bad rank", "[model]") {
  const auto text = to_json(builtin_scenario("one_cluster"));
  auto doc = nlohmann::json::parse(text);
  doc["extra"] = 1;
  CHECK_THROWS_AS(config_from_json(doc.dump()), MalformedConfig);
  doc = nlohmann::json::parse(text);
  doc["types"][0]["gamma"] = 1;
  CHECK_THROWS_AS(config_from_json(doc.dump()), MalformedConfig);
  doc = nlohmann::json::parse(text);
  doc["rank"] = 2;
  CHECK_THROWS_AS(config_from_json(doc.dump()), MalformedConfig);
  doc = nlohmann::json::parse(text);
  doc["controls"]["closure"] = "mirror";
  CHECK_THROWS_AS(config_from_json(doc.dump()), MalformedConfig);
  CHECK_THROWS_AS(config_from_json("{not json"), MalformedConfig);
}

TEST_CASE("factor step floors at zero and reports the raw increment", "[model]") {
  const SystematicRisk risk{4.0, 0.5, 0.5, 0.2};
  const auto up = advance_factor(risk, 0.2, 0.01, 0.1);
  CHECK_THAT(up.increment, WithinAbs(4.0 * 0.3 * 0.01 + 0.5 * std::sqrt(0.2) * 0.1, 1e-15));
  CHECK_THAT(up.next, WithinAbs(0.2 + up.increment, 1e-15));
  const auto down = advance_factor(risk, 0.01, 0.01, -5.0);
  CHECK(down.increment < -0.01);
  CHECK(down.next == 0.0);
  CHECK(risk.vol(-1.0) == 0.0);
}

TEST_CASE("trial seeds and noise streams are reproducible and distinct", "[model][rng]") {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(trial_seed(42, i));
  CHECK(seeds.size() == 1000);
  CHECK(trial_seed(42, 3) != trial_seed(43, 3));

  const auto a = common_noise(7, 100, 0.01);
  const auto b = common_noise(7, 100, 0.01);
  CHECK(a == b);
  CHECK(a != common_noise(8, 100, 0.01));
  auto e1 = make_stream(7, StreamKind::Name, 0);
  auto e2 = make_stream(7, StreamKind::OracleChunk, 0);
  CHECK(e1() != e2());

  const auto many = common_noise(11, 200000, 0.01);
  double m = 0.0, v = 0.0;
  for (double x : many) m += x;
  m /= static_cast<double>(many.size());
  for (double x : many) v += (x - m) * (x - m);
  v /= static_cast<double>(many.size());
  CHECK(std::abs(m) < 5.0 * 0.1 / std::sqrt(200000.0));
  CHECK_THAT(v, WithinAbs(0.01, 0.01 * 0.02));
}
