#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <ostream>
#include <span>
#include <vector>

#include "rdslab/graph.hpp"
#include "rdslab/rng.hpp"
#include "rdslab/tree.hpp"

namespace rdslab {

enum class Replacement { With, Without };

enum class RootInit { Stationary, Fixed, Uniform };

struct RootSpec {
  RootInit mode = RootInit::Stationary;
  NodeId node = 0;  // used by RootInit::Fixed
};

/// One realization of the tree-indexed walk. `assignment` covers every tree
/// node including an artificial root; the observation vectors skip it, so
/// observation k belongs to tree node k + first_observed().
struct WalkSample {
  std::shared_ptr<const ReferralTree> tree;  // pruned tree in without-replacement mode
  std::vector<NodeId> assignment;
  std::vector<double> deg_obs;
  std::vector<double> y_obs;  // empty until observe_feature
  Replacement mode = Replacement::With;
  RootSpec root;
  std::uint64_t seed = 0;
  std::size_t truncations = 0;

  std::size_t first_observed() const noexcept { return tree->artificial_root() ? 1 : 0; }
  std::size_t observed() const noexcept { return assignment.size() - first_observed(); }
};

/// Fills `out` with one with-replacement assignment: the root per `root`, then
/// each node in index order from the row of its parent's state.
void tp_walk_into(const Graph& g, const ReferralTree& t, RootSpec root, Rng& rng,
                  std::vector<NodeId>& out);

WalkSample tp_walk(const Graph& g, std::shared_ptr<const ReferralTree> t, RootSpec root, Rng& rng,
                   std::uint64_t seed = 0);

/// Referrals go to distinct unsampled neighbors, chosen with probability
/// proportional to edge weight, children handled in tree-index order. A
/// child with no unsampled neighbor left is dropped with its subtree.
WalkSample tp_walk_without_replacement(const Graph& g, std::shared_ptr<const ReferralTree> t,
                                       RootSpec root, Rng& rng, std::uint64_t seed = 0);

/// Sets and returns s.y_obs from a node function on the graph.
const std::vector<double>& observe_feature(WalkSample& s, std::span<const double> y);

/// Observed graph nodes in observation order.
std::vector<NodeId> observed_nodes(const WalkSample& s);

/// Rows "tree_node,graph_node,wave,y,deg" for observed nodes; graph_node is
/// the input id.
void write_walk_csv(std::ostream& out, const WalkSample& s, const Graph& g);

}  // namespace rdslab
