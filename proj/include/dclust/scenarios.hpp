#pragma once

#include "dclust/model.hpp"
#include "dclust/network.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dclust {

// A discrete one-dimensional law.
struct Marginal {
  std::vector<double> values;
  std::vector<double> probs;

  double mean() const;
};

// One type per element of the product of the beta^C marginals, weight the
// product probability; ell is the same for every type.
std::vector<NameType> product_types(const NameType& base, std::span<const Marginal> beta_c,
                                    std::span<const double> ell);

// Published distributions of the core-periphery network factors
// (cluster = 0 or 1).
Marginal core_periphery_beta(std::size_t cluster);
Marginal core_periphery_ell(std::size_t cluster);

// Factor columns rebuilt from the published marginals on 100 names
// (one name per 0.01 of probability), with the two leading singular values.
NetworkSVD core_periphery_table_factors();

// The published 10 x 10 upper-left block of the core-periphery matrix.
AdjacencyMatrix core_periphery_block();

// 1000 x 1000 rank-one matrix 10 * ell u^T with ell uniform and u taking
// two values in proportion 0.12361 : 0.06362 on the two halves.
AdjacencyMatrix one_cluster_matrix();

// one_cluster, two_cluster, two_cluster_rank1, core_periphery_one,
// core_periphery_two.
std::vector<std::string> scenario_names();
ScenarioConfig builtin_scenario(std::string_view name);

}  // namespace dclust
