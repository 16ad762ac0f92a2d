#include "rdslab/walk.hpp"

#include <cmath>
#include <string>

#include "rdslab/csv.hpp"
#include "rdslab/errors.hpp"

namespace rdslab {

namespace {

NodeId draw_root(const Graph& g, RootSpec root, Rng& rng) {
  switch (root.mode) {
    case RootInit::Fixed:
      if (root.node >= g.size()) throw Error(ErrorKind::Argument, "fixed root node out of range");
      return root.node;
    case RootInit::Uniform: {
      const auto k = static_cast<NodeId>(uniform01(rng) * static_cast<double>(g.size()));
      return k < g.size() ? k : static_cast<NodeId>(g.size() - 1);
    }
    case RootInit::Stationary:
      break;
  }
  return g.draw_stationary(uniform01(rng));
}

void fill_degrees(const Graph& g, WalkSample& s) {
  s.deg_obs.clear();
  s.deg_obs.reserve(s.observed());
  for (std::size_t k = s.first_observed(); k < s.assignment.size(); ++k)
    s.deg_obs.push_back(g.degrees()[s.assignment[k]]);
}

}  // namespace

void tp_walk_into(const Graph& g, const ReferralTree& t, RootSpec root, Rng& rng,
                  std::vector<NodeId>& out) {
  out.resize(t.size());
  out[0] = draw_root(g, root, rng);
  for (std::size_t i = 1; i < t.size(); ++i)
    out[i] = g.step(out[static_cast<std::size_t>(t.parent(static_cast<TreeIndex>(i)))], uniform01(rng));
}

WalkSample tp_walk(const Graph& g, std::shared_ptr<const ReferralTree> t, RootSpec root, Rng& rng,
                   std::uint64_t seed) {
  if (!t) throw Error(ErrorKind::Argument, "missing referral tree");
  WalkSample s;
  s.tree = std::move(t);
  s.mode = Replacement::With;
  s.root = root;
  s.seed = seed;
  tp_walk_into(g, *s.tree, root, rng, s.assignment);
  fill_degrees(g, s);
  return s;
}

WalkSample tp_walk_without_replacement(const Graph& g, std::shared_ptr<const ReferralTree> t,
                                       RootSpec root, Rng& rng, std::uint64_t seed) {
  if (!t) throw Error(ErrorKind::Argument, "missing referral tree");
  const ReferralTree& tree = *t;
  const std::size_t n = tree.size();

  std::vector<NodeId> state(n, 0);
  std::vector<char> kept(n, 0);
  std::vector<char> sampled(g.size(), 0);
  std::size_t truncations = 0;

  state[0] = draw_root(g, root, rng);
  kept[0] = 1;
  if (n > 1 && g.neighbors(state[0]).empty())
    throw Error(ErrorKind::Degenerate, "root has no neighbors");
  // An artificial root stands outside the population and does not occupy its node.
  if (!tree.artificial_root()) sampled[state[0]] = 1;

  for (std::size_t i = 1; i < n; ++i) {
    const auto p = static_cast<std::size_t>(tree.parent(static_cast<TreeIndex>(i)));
    if (!kept[p]) continue;
    const NodeId from = state[p];
    const auto nbrs = g.neighbors(from);
    const auto wts = g.neighbor_weights(from);
    double total = 0.0;
    for (std::size_t k = 0; k < nbrs.size(); ++k)
      if (!sampled[nbrs[k]]) total += wts[k];
    if (total <= 0.0) {
      ++truncations;
      continue;
    }
    const double target = uniform01(rng) * total;
    double acc = 0.0;
    // Rounding can leave target == total; the last eligible neighbor is then kept.
    NodeId pick = nbrs.back();
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      if (sampled[nbrs[k]]) continue;
      acc += wts[k];
      pick = nbrs[k];
      if (target < acc) break;
    }
    state[i] = pick;
    kept[i] = 1;
    sampled[pick] = 1;
  }

  WalkSample s;
  s.mode = Replacement::Without;
  s.root = root;
  s.seed = seed;
  s.truncations = truncations;
  if (truncations == 0) {
    s.tree = std::move(t);
    s.assignment = std::move(state);
  } else {
    std::vector<std::int64_t> new_index(n, -1);
    std::vector<std::int64_t> parent;
    for (std::size_t i = 0; i < n; ++i) {
      if (!kept[i]) continue;
      new_index[i] = static_cast<std::int64_t>(parent.size());
      const std::int64_t p = tree.parent(static_cast<TreeIndex>(i));
      parent.push_back(p == kNoParent ? kNoParent : new_index[static_cast<std::size_t>(p)]);
      s.assignment.push_back(state[i]);
    }
    s.tree = std::make_shared<const ReferralTree>(std::move(parent), tree.artificial_root());
  }
  fill_degrees(g, s);
  return s;
}

const std::vector<double>& observe_feature(WalkSample& s, std::span<const double> y) {
  s.y_obs.clear();
  s.y_obs.reserve(s.observed());
  for (std::size_t k = s.first_observed(); k < s.assignment.size(); ++k) {
    const NodeId v = s.assignment[k];
    if (v >= y.size() || std::isnan(y[v]))
      throw Error(ErrorKind::Data, "feature missing for sampled node " + std::to_string(v));
    s.y_obs.push_back(y[v]);
  }
  return s.y_obs;
}

std::vector<NodeId> observed_nodes(const WalkSample& s) {
  return {s.assignment.begin() + static_cast<std::ptrdiff_t>(s.first_observed()), s.assignment.end()};
}

void write_walk_csv(std::ostream& out, const WalkSample& s, const Graph& g) {
  out << "tree_node,graph_node,wave,y,deg\n";
  const std::size_t first = s.first_observed();
  for (std::size_t k = first; k < s.assignment.size(); ++k) {
    const std::size_t obs = k - first;
    out << k << ',' << g.original_ids()[s.assignment[k]] << ',' << s.tree->wave(static_cast<TreeIndex>(k)) << ','
        << (obs < s.y_obs.size() ? format_double(s.y_obs[obs]) : std::string()) << ','
        << format_double(s.deg_obs[obs]) << '\n';
  }
}

}  // namespace rdslab
