#include "rdslab/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "rdslab/csv.hpp"
#include "rdslab/errors.hpp"

namespace rdslab {
namespace {

// Component labels by BFS; returns the label of the largest component, ties
// going to the component that contains the smallest node id.
std::vector<std::size_t> largest_component(std::size_t n,
                                           const std::vector<std::vector<std::pair<NodeId, double>>>& adj) {
  std::vector<std::int64_t> label(n, -1);
  std::size_t best_label = 0, best_size = 0, next_label = 0;
  std::queue<NodeId> queue;
  for (std::size_t s = 0; s < n; ++s) {
    if (label[s] >= 0 || adj[s].empty()) continue;
    std::size_t count = 0;
    label[s] = static_cast<std::int64_t>(next_label);
    queue.push(static_cast<NodeId>(s));
    while (!queue.empty()) {
      const NodeId u = queue.front();
      queue.pop();
      ++count;
      for (const auto& [v, w] : adj[u]) {
        if (label[v] < 0) {
          label[v] = static_cast<std::int64_t>(next_label);
          queue.push(v);
        }
      }
    }
    if (count > best_size) {
      best_size = count;
      best_label = next_label;
    }
    ++next_label;
  }
  std::vector<std::size_t> keep;
  keep.reserve(best_size);
  for (std::size_t i = 0; i < n; ++i)
    if (label[i] == static_cast<std::int64_t>(best_label) && best_size > 0) keep.push_back(i);
  return keep;
}

}  // namespace

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges) {
  std::vector<std::vector<std::pair<NodeId, double>>> adj(n);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edges.size() * 2);
  for (const Edge& e : edges) {
    if (e.u >= n || e.v >= n)
      throw Error(ErrorKind::Domain, "edge endpoint out of range");
    if (!(e.w >= 0.0) || !std::isfinite(e.w))
      throw Error(ErrorKind::Domain, "edge weights must be finite and nonnegative");
    if (e.u == e.v) throw Error(ErrorKind::Domain, "self-loop on node " + std::to_string(e.u));
    const std::uint64_t lo = std::min(e.u, e.v), hi = std::max(e.u, e.v);
    if (!seen.insert((lo << 32) | hi).second)
      throw Error(ErrorKind::Domain,
                  "duplicate edge " + std::to_string(lo) + " " + std::to_string(hi));
    if (e.w == 0.0) continue;
    adj[e.u].emplace_back(e.v, e.w);
    adj[e.v].emplace_back(e.u, e.w);
  }

  const std::vector<std::size_t> keep = largest_component(n, adj);
  if (keep.empty()) throw Error(ErrorKind::Construction, "graph has no edges");

  std::vector<std::int64_t> remap(n, -1);
  for (std::size_t k = 0; k < keep.size(); ++k) remap[keep[k]] = static_cast<std::int64_t>(k);

  Graph g;
  const std::size_t m = keep.size();
  g.dropped_ = n - m;
  g.original_ids_.resize(m);
  g.offsets_.assign(m + 1, 0);
  g.degree_.assign(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    g.original_ids_[k] = static_cast<NodeId>(keep[k]);
    auto& row = adj[keep[k]];
    std::vector<std::pair<NodeId, double>> mapped;
    mapped.reserve(row.size());
    for (const auto& [v, w] : row) mapped.emplace_back(static_cast<NodeId>(remap[v]), w);
    std::sort(mapped.begin(), mapped.end());
    double running = 0.0;
    for (const auto& [v, w] : mapped) {
      g.neighbors_.push_back(v);
      g.weights_.push_back(w);
      running += w;
      g.cumulative_.push_back(running);
      if (w != 1.0) g.unweighted_ = false;
    }
    g.degree_[k] = running;
    g.offsets_[k + 1] = g.neighbors_.size();
  }
  g.total_degree_ = std::accumulate(g.degree_.begin(), g.degree_.end(), 0.0);
  g.pi_.resize(m);
  g.pi_cumulative_.resize(m);
  double running = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    g.pi_[k] = g.degree_[k] / g.total_degree_;
    running += g.degree_[k];
    g.pi_cumulative_[k] = running;
  }
  return g;
}

double Graph::weight(NodeId i, NodeId j) const noexcept {
  const auto nb = neighbors(i);
  const auto it = std::lower_bound(nb.begin(), nb.end(), j);
  if (it == nb.end() || *it != j) return 0.0;
  return weights_[offsets_[i] + static_cast<std::size_t>(it - nb.begin())];
}

NodeId Graph::step(NodeId i, double u) const noexcept {
  const std::span<const double> row{cumulative_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  return neighbors_[offsets_[i] + invert_cumulative(row, u)];
}

NodeId Graph::draw_stationary(double u) const noexcept {
  return static_cast<NodeId>(invert_cumulative(pi_cumulative_, u));
}

Eigen::MatrixXd Graph::weight_matrix() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (NodeId i = 0; i < size(); ++i) {
    const auto nb = neighbors(i);
    const auto wt = neighbor_weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k) w(i, nb[k]) = wt[k];
  }
  return w;
}

Eigen::MatrixXd Graph::transition_matrix() const {
  Eigen::MatrixXd p = weight_matrix();
  for (Eigen::Index i = 0; i < p.rows(); ++i) p.row(i) /= degree_[static_cast<std::size_t>(i)];
  return p;
}

Graph parse_edge_list(std::span<const std::string> lines) {
  std::vector<Edge> edges;
  std::size_t n = 0;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::string_view line = lines[ln];
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::istringstream fields{std::string(line)};
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != 2 && tok.size() != 3)
      throw ParseError(ln + 1, "expected \"i j w\", got " + std::to_string(tok.size()) + " fields");
    Edge e;
    auto parse_id = [&](const std::string& s) {
      std::uint64_t v = 0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size() || v > 0xFFFFFFFEULL)
        throw ParseError(ln + 1, "bad node id '" + s + "'");
      return static_cast<NodeId>(v);
    };
    e.u = parse_id(tok[0]);
    e.v = parse_id(tok[1]);
    if (tok.size() == 3) {
      try {
        std::size_t used = 0;
        e.w = std::stod(tok[2], &used);
        if (used != tok[2].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError(ln + 1, "bad weight '" + tok[2] + "'");
      }
      if (e.w < 0.0) throw Error(ErrorKind::Domain, "negative weight on line " + std::to_string(ln + 1));
    }
    n = std::max<std::size_t>(n, std::max(e.u, e.v) + 1);
    edges.push_back(e);
  }
  return Graph::from_edges(n, edges);
}

Graph read_edge_list(std::istream& in) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  return parse_edge_list(lines);
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << "# nodes " << g.size() << " edges " << g.edge_count() << '\n';
  const auto ids = g.original_ids();
  for (NodeId i = 0; i < g.size(); ++i) {
    const auto nb = g.neighbors(i);
    const auto wt = g.neighbor_weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k)
      if (nb[k] > i) out << ids[i] << ' ' << ids[nb[k]] << ' ' << format_double(wt[k]) << '\n';
  }
}

std::vector<double> read_node_attribute(std::istream& in, std::string_view feature, const Graph& g) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError(1, "empty attribute file");
  const auto names = split_csv_line(header);
  if (names.empty() || names[0] != "node") throw ParseError(1, "header must start with 'node'");
  const auto col = std::find(names.begin(), names.end(), feature);
  if (col == names.end())
    throw Error(ErrorKind::Data, "attribute '" + std::string(feature) + "' not in header");
  const auto idx = static_cast<std::size_t>(col - names.begin());

  std::unordered_map<NodeId, double> by_id;
  std::size_t ln = 1;
  for (std::string line; std::getline(in, line);) {
    ++ln;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != names.size()) throw ParseError(ln, "wrong number of cells");
    try {
      by_id[static_cast<NodeId>(std::stoul(cells[0]))] = std::stod(cells[idx]);
    } catch (const std::exception&) {
      throw ParseError(ln, "non-numeric cell");
    }
  }
  std::vector<double> values(g.size());
  for (NodeId k = 0; k < g.size(); ++k) {
    const auto it = by_id.find(g.original_ids()[k]);
    if (it == by_id.end())
      throw Error(ErrorKind::Data, "node " + std::to_string(g.original_ids()[k]) + " has no '" +
                                       std::string(feature) + "' value");
    values[k] = it->second;
  }
  return values;
}

void write_node_attributes(std::ostream& out, const Graph& g, std::span<const std::string> names,
                           std::span<const std::vector<double>> columns) {
  if (names.size() != columns.size()) throw Error(ErrorKind::Dimension, "names/columns mismatch");
  out << "node";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (NodeId k = 0; k < g.size(); ++k) {
    out << g.original_ids()[k];
    for (const auto& c : columns) out << ',' << format_double(c.at(k));
    out << '\n';
  }
}

std::pair<double, double> sbm_parameters_for(double lambda2, double density_sum) {
  return {density_sum * (1.0 + lambda2) / 2.0, density_sum * (1.0 - lambda2) / 2.0};
}

SbmGraph sbm_sample(std::size_t n, double p, double r, Rng& rng) {
  if (n < 2 || n % 2 != 0) throw Error(ErrorKind::Argument, "SBM needs an even node count >= 2");
  if (!(0.0 <= r && r <= p && p <= 1.0))
    throw Error(ErrorKind::Argument, "SBM needs 0 <= r <= p <= 1");
  if (p + r == 0.0) throw Error(ErrorKind::Degenerate, "SBM with p + r = 0 has no edges");

  const std::size_t half = n / 2;
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(static_cast<double>(n) * static_cast<double>(half) * (p + r) * 1.1) + 16);

  // Geometric skipping over the candidate partners j in [lo, hi) of row i.
  auto sample_range = [&](NodeId i, std::size_t lo, std::size_t hi, double prob) {
    if (prob <= 0.0 || lo >= hi) return;
    if (prob >= 1.0) {
      for (std::size_t j = lo; j < hi; ++j) edges.push_back({i, static_cast<NodeId>(j), 1.0});
      return;
    }
    const double log_q = std::log1p(-prob);
    std::size_t j = lo;
    for (;;) {
      double u = uniform01(rng);
      while (u <= 0.0) u = uniform01(rng);
      const double skip = std::floor(std::log(u) / log_q);
      if (skip >= static_cast<double>(hi - j)) return;
      j += static_cast<std::size_t>(skip);
      edges.push_back({i, static_cast<NodeId>(j), 1.0});
      ++j;
      if (j >= hi) return;
    }
  };

  for (std::size_t i = 0; i < n; ++i) {
    const auto node = static_cast<NodeId>(i);
    if (i < half) {
      sample_range(node, i + 1, half, p);
      sample_range(node, half, n, r);
    } else {
      sample_range(node, i + 1, n, p);
    }
  }

  SbmGraph out{Graph::from_edges(n, edges), {}, (p - r) / (p + r)};
  out.block.reserve(out.graph.size());
  for (NodeId id : out.graph.original_ids()) out.block.push_back(id < half ? 0 : 1);
  return out;
}

}  // namespace rdslab
