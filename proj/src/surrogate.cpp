#include "rdslab/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rdslab/errors.hpp"

namespace rdslab {

const std::vector<double>& PopulationData::feature(std::string_view name) const {
  for (std::size_t k = 0; k < names.size(); ++k)
    if (names[k] == name) return features[k];
  throw Error(ErrorKind::Data, "unknown feature '" + std::string(name) + "'");
}

PopulationData surrogate_network(const SurrogateParams& params, Rng& rng) {
  const std::size_t n = params.n;
  if (n < 4) throw Error(ErrorKind::Argument, "surrogate network needs at least 4 nodes");
  if (!(params.nominate_prob >= 0.0 && params.nominate_prob <= 1.0) ||
      !(params.cross_school >= 0.0 && params.cross_school <= 1.0))
    throw Error(ErrorKind::Argument, "surrogate probabilities must lie in [0, 1]");

  const std::size_t half = n / 2;
  auto school_of = [&](std::size_t i) { return i < half ? 0 : 1; };
  std::vector<double> popularity(n);
  for (double& w : popularity) w = -std::log1p(-uniform01(rng));

  // Per-school cumulative popularity over the school's id range.
  std::vector<std::vector<double>> cumulative(2);
  for (std::size_t i = 0; i < n; ++i) {
    auto& c = cumulative[static_cast<std::size_t>(school_of(i))];
    c.push_back((c.empty() ? 0.0 : c.back()) + popularity[i]);
  }
  const std::size_t base[2] = {0, half};

  std::map<std::pair<NodeId, NodeId>, double> weight;
  std::vector<double> named(n, 0.0);
  std::vector<NodeId> chosen;
  for (std::size_t i = 0; i < n; ++i) {
    unsigned k = 0;
    for (unsigned t = 0; t < params.max_nominations; ++t) k += uniform01(rng) < params.nominate_prob ? 1 : 0;
    chosen.clear();
    // Bounded rejection of self and repeat picks; a student may end up naming fewer.
    for (unsigned attempt = 0; chosen.size() < k && attempt < 50 * params.max_nominations; ++attempt) {
      int school = school_of(i);
      if (uniform01(rng) < params.cross_school) school = 1 - school;
      const auto s = static_cast<std::size_t>(school);
      const auto j = static_cast<NodeId>(base[s] + invert_cumulative(cumulative[s], uniform01(rng)));
      if (j == i || std::find(chosen.begin(), chosen.end(), j) != chosen.end()) continue;
      chosen.push_back(j);
    }
    named[i] = static_cast<double>(chosen.size());
    for (NodeId j : chosen) {
      const auto self = static_cast<NodeId>(i);
      weight[{std::min(self, j), std::max(self, j)}] += 1.0;
    }
  }

  std::vector<Edge> edges;
  edges.reserve(weight.size());
  for (const auto& [key, w] : weight) edges.push_back({key.first, key.second, w});

  PopulationData pop{Graph::from_edges(n, edges), {"gender", "nominations"}, {}};
  std::vector<double> gender(n);
  for (double& g : gender) g = uniform01(rng) < 0.5 ? 1.0 : 0.0;
  std::vector<double> kept_gender, kept_named;
  for (NodeId id : pop.graph.original_ids()) {
    kept_gender.push_back(gender[id]);
    kept_named.push_back(named[id]);
  }
  pop.features = {std::move(kept_gender), std::move(kept_named)};
  return pop;
}

}  // namespace rdslab
