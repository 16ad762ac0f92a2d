#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rdslab/graph.hpp"
#include "rdslab/rng.hpp"

namespace rdslab {

/// A graph with named node features aligned to its retained nodes.
struct PopulationData {
  Graph graph;
  std::vector<std::string> names;
  std::vector<std::vector<double>> features;

  const std::vector<double>& feature(std::string_view name) const;
};

/// Synthetic friendship network shaped like a two-school nomination survey:
/// every student names Binomial(max_nominations, nominate_prob) distinct
/// friends, preferring popular ones (exponential popularity weights) and
/// crossing schools with probability cross_school. Nominations are then
/// symmetrized to A + A^T, so mutual pairs carry weight 2.
struct SurrogateParams {
  std::size_t n = 1089;
  unsigned max_nominations = 10;
  double nominate_prob = 0.4;
  double cross_school = 0.035;
};

/// Features: "gender" (independent fair coin) and "nominations" (number of
/// friends named, correlated with degree).
PopulationData surrogate_network(const SurrogateParams& params, Rng& rng);

}  // namespace rdslab
