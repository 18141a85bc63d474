#include "dclust/scenarios.hpp"

#include "dclust/errors.hpp"
#include "dclust/meanfield.hpp"

#include <cmath>
#include <string>

namespace dclust {

double Marginal::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) m += values[i] * probs[i];
  return m;
}

std::vector<NameType> product_types(const NameType& base, std::span<const Marginal> beta_c,
                                    std::span<const double> ell) {
  std::vector<NameType> types{base};
  types.front().beta_c.clear();
  types.front().ell.assign(ell.begin(), ell.end());
  types.front().weight = 1.0;
  for (const auto& marginal : beta_c) {
    std::vector<NameType> next;
    for (const auto& t : types) {
      for (std::size_t i = 0; i < marginal.values.size(); ++i) {
        NameType n = t;
        n.beta_c.push_back(marginal.values[i]);
        n.weight = t.weight * marginal.probs[i];
        next.push_back(std::move(n));
      }
    }
    types = std::move(next);
  }
  for (std::size_t i = 0; i < types.size(); ++i) types[i].label = base.label + std::to_string(i + 1);
  return types;
}

Marginal core_periphery_beta(std::size_t cluster) {
  if (cluster == 0)
    return {{9.6707, 11.8406, 11.9426, 14.1198, 15.6449, 15.7501}, {0.70, 0.13, 0.14, 0.01, 0.01, 0.01}};
  if (cluster == 1)
    return {{-8.2340, -6.4583, -6.4339, -0.4545, 0.1979, 6.1494, 6.1773, 8.2984},
            {0.01, 0.10, 0.04, 0.01, 0.70, 0.04, 0.09, 0.01}};
  throw RankOutOfRange("core-periphery tables cover two clusters");
}

Marginal core_periphery_ell(std::size_t cluster) {
  if (cluster == 0) return {{0.0934, 0.0989, 0.2424, 0.2533}, {0.78, 0.20, 0.01, 0.01}};
  if (cluster == 1)
    return {{-0.7360, -0.0293, -0.0239, -0.0022, 0.0027, 0.0081, 0.0354, 0.6608},
            {0.01, 0.09, 0.01, 0.04, 0.70, 0.04, 0.10, 0.01}};
  throw RankOutOfRange("core-periphery tables cover two clusters");
}

NetworkSVD core_periphery_table_factors() {
  constexpr std::size_t n = 100;
  NetworkSVD svd;
  svd.n = n;
  svd.rank = 2;
  svd.singular_values = {105.1800, 34.8857};
  svd.left.resize(2 * n);
  svd.right.resize(2 * n);
  const auto fill = [&](std::vector<double>& column, std::size_t j, const Marginal& m, double scale) {
    std::size_t row = 0;
    for (std::size_t i = 0; i < m.values.size(); ++i) {
      const auto count = static_cast<std::size_t>(std::llround(m.probs[i] * n));
      for (std::size_t c = 0; c < count; ++c) column[j * n + row++] = m.values[i] / scale;
    }
    if (row != n) throw MalformedConfig("table probabilities do not resolve to 100 names");
  };
  for (std::size_t j = 0; j < 2; ++j) {
    fill(svd.right, j, core_periphery_beta(j), svd.singular_values[j]);
    fill(svd.left, j, core_periphery_ell(j), 1.0);
  }
  return svd;
}

AdjacencyMatrix core_periphery_block() {
  static constexpr double rows[10][10] = {
      {0, 10, 1, 10, 10, 1, 10, 1, 1, 10}, {10, 0, 1, 1, 10, 10, 10, 1, 10, 1}, {1, 1, 0, 1, 1, 1, 1, 1, 1, 1},
      {5, 1, 1, 0, 1, 1, 1, 1, 1, 1},      {5, 5, 1, 1, 0, 1, 1, 1, 1, 1},      {1, 5, 1, 1, 1, 0, 1, 1, 1, 1},
      {5, 1, 1, 1, 1, 1, 0, 1, 1, 1},      {1, 1, 1, 1, 1, 1, 1, 0, 1, 1},      {1, 5, 1, 1, 1, 1, 1, 1, 0, 1},
      {1, 1, 1, 1, 1, 1, 1, 1, 1, 0}};
  AdjacencyMatrix a(10);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) a(i, j) = rows[i][j];
  return a;
}

AdjacencyMatrix one_cluster_matrix() {
  constexpr std::size_t n = 1000;
  const double norm = std::sqrt(500.0 * (0.12361 * 0.12361 + 0.06362 * 0.06362));
  const double ell = 1.0 / std::sqrt(static_cast<double>(n));
  AdjacencyMatrix a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 10.0 * ell * (j < n / 2 ? 0.12361 : 0.06362) / norm;
  return a;
}

namespace {

NameType base_type(std::string label) {
  NameType t;
  t.label = std::move(label);
  t.sigma = 0.9;
  t.drift = AffineDrift{4.0, 0.2};
  t.beta_s = 2.0;
  t.rho = 0.5;
  t.lambda0 = 0.2;
  return t;
}

ScenarioConfig scenario_frame(std::vector<NameType> types) {
  ScenarioConfig c;
  c.types = std::move(types);
  c.risk = {4.0, 0.5, 0.5, 0.2};
  c.controls.t_end = 1.0;
  c.controls.dt = 0.01;
  c.controls.moment_cap = 20;
  c.controls.trials = 2000;
  c.controls.seed = 20240501;
  c.controls.closure = ClosureRule::CopyLast;
  c.pool_size = 1000;
  return c;
}

ScenarioConfig two_cluster() {
  const Marginal beta[] = {{{0.2050, 0.3980}, {0.5, 0.5}}, {{0.0009, 0.0022}, {2.0 / 3.0, 1.0 / 3.0}}};
  const Marginal ell2{{0.0043, -0.0022}, {0.5, 0.5}};
  const double ell[] = {0.0316, ell2.mean()};
  return scenario_frame(product_types(base_type("p"), beta, ell));
}

ScenarioConfig core_periphery(std::size_t clusters) {
  std::vector<Marginal> beta;
  std::vector<double> ell;
  for (std::size_t j = 0; j < clusters; ++j) {
    beta.push_back(core_periphery_beta(j));
    ell.push_back(core_periphery_ell(j).mean());
  }
  return scenario_frame(product_types(base_type("p"), beta, ell));
}

}  // namespace

std::vector<std::string> scenario_names() {
  return {"one_cluster", "two_cluster", "two_cluster_rank1", "core_periphery_one", "core_periphery_two"};
}

ScenarioConfig builtin_scenario(std::string_view name) {
  if (name == "one_cluster") {
    const Marginal beta[] = {{{1.2361, 0.6362}, {0.5, 0.5}}};
    const double ell[] = {0.0316};
    return scenario_frame(product_types(base_type("p"), beta, ell));
  }
  if (name == "two_cluster") return two_cluster();
  if (name == "two_cluster_rank1") return reduce_rank(two_cluster(), 1);
  if (name == "core_periphery_one") return core_periphery(1);
  if (name == "core_periphery_two") return core_periphery(2);
  throw MalformedConfig("unknown built-in scenario '" + std::string(name) + "'");
}

}  // namespace dclust
