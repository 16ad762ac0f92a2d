#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rdslab/rng.hpp"

namespace rdslab {

using NodeId = std::uint32_t;

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  double w = 1.0;
};

/// Weighted undirected simple graph in compressed adjacency form, together
/// with the degree vector and the stationary law pi_i = deg(i) / sum_k deg(k)
/// of the walk P_ij = w_ij / deg(i).
///
/// Construction keeps only the largest connected component; dropped nodes are
/// counted and surviving nodes remember their input ids. Immutable afterwards.
class Graph {
 public:
  /// Builds from undirected records over ids [0, n). Each unordered pair may
  /// appear at most once; zero-weight records are ignored.
  static Graph from_edges(std::size_t n, std::span<const Edge> edges);

  std::size_t size() const noexcept { return degree_.size(); }
  std::size_t edge_count() const noexcept { return neighbors_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId i) const noexcept {
    return {neighbors_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::span<const double> neighbor_weights(NodeId i) const noexcept {
    return {weights_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  /// w_ij, zero when i and j are not adjacent.
  double weight(NodeId i, NodeId j) const noexcept;

  std::span<const double> degrees() const noexcept { return degree_; }
  std::span<const double> pi() const noexcept { return pi_; }
  double total_degree() const noexcept { return total_degree_; }
  double mean_degree() const noexcept { return total_degree_ / static_cast<double>(size()); }
  bool unweighted() const noexcept { return unweighted_; }

  /// Input id of each retained node.
  std::span<const NodeId> original_ids() const noexcept { return original_ids_; }
  std::size_t dropped_nodes() const noexcept { return dropped_; }

  /// Draws a neighbor of i with probability w_ij / deg(i) by cumulative-sum
  /// inversion of u in [0, 1).
  NodeId step(NodeId i, double u) const noexcept;
  /// Draws a node with probability pi_i by cumulative-sum inversion.
  NodeId draw_stationary(double u) const noexcept;

  Eigen::MatrixXd weight_matrix() const;
  Eigen::MatrixXd transition_matrix() const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> neighbors_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;  // per-row inclusive prefix sums
  std::vector<double> degree_;
  std::vector<double> pi_;
  std::vector<double> pi_cumulative_;
  std::vector<NodeId> original_ids_;
  std::size_t dropped_ = 0;
  double total_degree_ = 0.0;
  bool unweighted_ = true;
};

/// Parses whitespace-separated "i j w" records ("i j" means w = 1); '#'
/// starts a comment. Node count is one past the largest id.
Graph read_edge_list(std::istream& in);
Graph parse_edge_list(std::span<const std::string> lines);
/// Endpoints are written as input ids, matching write_node_attributes.
void write_edge_list(std::ostream& out, const Graph& g);

/// Reads a "node,<feature>" CSV keyed by input node id and returns the
/// feature on the graph's retained nodes.
std::vector<double> read_node_attribute(std::istream& in, std::string_view feature,
                                        const Graph& g);
void write_node_attributes(std::ostream& out, const Graph& g,
                           std::span<const std::string> names,
                           std::span<const std::vector<double>> columns);

/// Two-block Stochastic Blockmodel draw with a retained block label per node.
struct SbmGraph {
  Graph graph;
  std::vector<int> block;  // 0 or 1 for each retained node

  /// lambda2 of the expected block kernel, (p - r) / (p + r).
  double target_lambda2 = 0.0;
};

/// n nodes split into halves [0, n/2) and [n/2, n); each within-block pair is
/// joined with probability p and each between-block pair with probability r.
SbmGraph sbm_sample(std::size_t n, double p, double r, Rng& rng);

/// (p, r) with p + r = density_sum and (p - r) / (p + r) = lambda2.
std::pair<double, double> sbm_parameters_for(double lambda2, double density_sum);

}  // namespace rdslab
