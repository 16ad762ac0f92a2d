#include "rdslab/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "rdslab/csv.hpp"
#include "rdslab/errors.hpp"

namespace rdslab {

ReferralTree::ReferralTree(std::vector<std::int64_t> parent, bool artificial_root)
    : parent_(std::move(parent)), artificial_root_(artificial_root) {
  const std::size_t n = parent_.size();
  if (n == 0) throw Error(ErrorKind::Argument, "tree must have at least one node");
  if (parent_[0] != kNoParent) throw Error(ErrorKind::Argument, "node 0 must be the root");
  wave_.assign(n, 0);
  child_offsets_.assign(n + 1, 0);
  for (std::size_t i = 1; i < n; ++i) {
    const std::int64_t p = parent_[i];
    if (p < 0 || static_cast<std::size_t>(p) >= i)
      throw Error(ErrorKind::Argument, "parent of node " + std::to_string(i) + " must precede it");
    wave_[i] = wave_[static_cast<std::size_t>(p)] + 1;
    height_ = std::max(height_, wave_[i]);
    ++child_offsets_[static_cast<std::size_t>(p) + 1];
  }
  std::partial_sum(child_offsets_.begin(), child_offsets_.end(), child_offsets_.begin());
  children_.resize(n - 1);
  std::vector<std::size_t> fill(child_offsets_.begin(), child_offsets_.end() - 1);
  for (std::size_t i = 1; i < n; ++i)
    children_[fill[static_cast<std::size_t>(parent_[i])]++] = static_cast<TreeIndex>(i);
}

std::vector<std::size_t> ReferralTree::wave_sizes() const {
  std::vector<std::size_t> sizes(height_ + 1, 0);
  for (unsigned w : wave_) ++sizes[w];
  return sizes;
}

bool ReferralTree::is_m_tree(unsigned m) const noexcept {
  for (std::size_t i = 0; i < size(); ++i) {
    const std::size_t expect = wave_[i] < height_ ? m : 0;
    if (offspring(static_cast<TreeIndex>(i)) != expect) return false;
  }
  return true;
}

ReferralTree ReferralTree::prefix(std::size_t n) const {
  if (n == 0 || n > size()) throw Error(ErrorKind::Argument, "prefix length out of range");
  return ReferralTree(std::vector<std::int64_t>(parent_.begin(), parent_.begin() + static_cast<std::ptrdiff_t>(n)),
                      artificial_root_);
}

ReferralTree m_tree(unsigned m, unsigned h, std::size_t cap) {
  if (m < 1) throw Error(ErrorKind::Argument, "m-tree needs m >= 1");
  // n = 1 + m + ... + m^h, accumulated with an overflow guard.
  std::size_t n = 0, level = 1;
  for (unsigned w = 0; w <= h; ++w) {
    n += level;
    if (n > cap) throw Error(ErrorKind::Capacity, "m-tree exceeds node cap " + std::to_string(cap));
    if (w < h) {
      if (level > cap / m + 1) throw Error(ErrorKind::Capacity, "m-tree exceeds node cap " + std::to_string(cap));
      level *= m;
    }
  }
  std::vector<std::int64_t> parent(n);
  parent[0] = kNoParent;
  for (std::size_t i = 1; i < n; ++i) parent[i] = static_cast<std::int64_t>((i - 1) / m);
  return ReferralTree(std::move(parent));
}

OffspringLaw::OffspringLaw(std::vector<double> probabilities) : probs_(std::move(probabilities)) {
  if (probs_.empty()) throw Error(ErrorKind::Argument, "offspring law is empty");
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw Error(ErrorKind::Argument, "offspring probabilities must be nonnegative");
    total += p;
    cumulative_.push_back(total);
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorKind::Argument, "offspring law must sum to 1");
}

std::size_t OffspringLaw::draw(Rng& rng) const noexcept {
  return invert_cumulative(cumulative_, uniform01(rng));
}

double OffspringLaw::mean() const noexcept {
  double m = 0.0;
  for (std::size_t k = 0; k < probs_.size(); ++k) m += static_cast<double>(k) * probs_[k];
  return m;
}

namespace {

// Appends one wave of offspring for parents in [begin, end); returns the new end.
std::size_t grow_wave(const OffspringLaw& law, std::vector<std::int64_t>& parent, std::size_t begin,
                      std::size_t end, Rng& rng, std::size_t cap) {
  for (std::size_t p = begin; p < end; ++p) {
    const std::size_t kids = law.draw(rng);
    if (parent.size() + kids > cap)
      throw Error(ErrorKind::Capacity, "Galton-Watson tree exceeds node cap " + std::to_string(cap));
    parent.insert(parent.end(), kids, static_cast<std::int64_t>(p));
  }
  return parent.size();
}

}  // namespace

ReferralTree galton_watson_waves(const OffspringLaw& law, unsigned max_wave, Rng& rng, std::size_t cap) {
  std::vector<std::int64_t> parent{kNoParent};
  std::size_t begin = 0, end = 1;
  for (unsigned w = 0; w < max_wave && begin < end; ++w) {
    const std::size_t next = grow_wave(law, parent, begin, end, rng, cap);
    begin = end;
    end = next;
  }
  return ReferralTree(std::move(parent));
}

ReferralTree galton_watson_capped(const OffspringLaw& law, std::size_t node_cap, Rng& rng,
                                  unsigned restart_budget, std::size_t hard_cap) {
  if (node_cap < 1) throw Error(ErrorKind::Argument, "node cap must be positive");
  if (node_cap > 1 && law.extinction_free_mass() <= 0.0)
    throw Error(ErrorKind::Argument, "offspring law has P(eta >= 1) = 0");
  for (unsigned attempt = 0; attempt < restart_budget; ++attempt) {
    std::vector<std::int64_t> parent{kNoParent};
    std::size_t begin = 0, end = 1;
    while (parent.size() < node_cap && begin < end) {
      const std::size_t next = grow_wave(law, parent, begin, end, rng, hard_cap);
      begin = end;
      end = next;
    }
    if (parent.size() >= node_cap) return ReferralTree(std::move(parent));
  }
  throw Error(ErrorKind::Extinction, "Galton-Watson tree went extinct " + std::to_string(restart_budget) +
                                         " times before reaching " + std::to_string(node_cap) + " nodes");
}

ReferralTree attach_artificial_root(std::span<const ReferralTree> subtrees) {
  if (subtrees.empty()) throw Error(ErrorKind::Argument, "need at least one seed subtree");
  std::vector<std::int64_t> parent{kNoParent};
  for (const ReferralTree& sub : subtrees) {
    const auto offset = static_cast<std::int64_t>(parent.size());
    parent.push_back(0);
    for (std::size_t i = 1; i < sub.size(); ++i)
      parent.push_back(sub.parent(static_cast<TreeIndex>(i)) + offset);
  }
  return ReferralTree(std::move(parent), true);
}

DistancePGF::DistancePGF(std::size_t n, std::vector<std::uint64_t> counts) : n_(n), counts_(std::move(counts)) {
  if (n_ == 0 || counts_.empty()) throw Error(ErrorKind::Argument, "empty distance distribution");
  while (counts_.size() > 1 && counts_.back() == 0) counts_.pop_back();
}

DistancePGF::Value DistancePGF::eval(double z) const noexcept {
  // Horner for the polynomial and its first two derivatives.
  const double norm = static_cast<double>(n_) * static_cast<double>(n_);
  Value v;
  for (std::size_t d = counts_.size(); d-- > 0;) {
    v.d2g = v.d2g * z + 2.0 * v.dg;
    v.dg = v.dg * z + v.g;
    v.g = v.g * z + static_cast<double>(counts_[d]) / norm;
  }
  return v;
}

DistancePGF distance_pgf(const ReferralTree& t, bool include_artificial_root, std::size_t cap) {
  const std::size_t n = t.size();
  if (n > cap) throw Error(ErrorKind::Capacity, "tree exceeds node cap " + std::to_string(cap));

  // depth[v][k]: descendants of v at relative depth k. Pairs whose lowest
  // common ancestor is v are counted when v's children are merged in.
  std::vector<std::uint64_t> counts(2 * static_cast<std::size_t>(t.height()) + 1, 0);
  counts[0] = n;
  std::vector<std::vector<std::uint64_t>> depth(n);
  for (std::size_t v = n; v-- > 0;) {
    std::vector<std::uint64_t> acc{1};
    for (TreeIndex c : t.children(static_cast<TreeIndex>(v))) {
      std::vector<std::uint64_t>& child = depth[c];
      for (std::size_t a = 0; a < acc.size(); ++a) {
        if (acc[a] == 0) continue;
        for (std::size_t b = 0; b < child.size(); ++b) counts[a + b + 1] += 2 * acc[a] * child[b];
      }
      if (acc.size() < child.size() + 1) acc.resize(child.size() + 1, 0);
      for (std::size_t b = 0; b < child.size(); ++b) acc[b + 1] += child[b];
      std::vector<std::uint64_t>().swap(child);
    }
    depth[v] = std::move(acc);
  }

  std::size_t nodes = n;
  if (t.artificial_root() && !include_artificial_root) {
    if (n == 1) throw Error(ErrorKind::Argument, "tree holds only the artificial root");
    // Remove ordered pairs with the root at either end: the root sits at
    // distance wave(i) from node i.
    counts[0] -= 1;
    for (std::size_t i = 1; i < n; ++i) counts[t.wave(static_cast<TreeIndex>(i))] -= 2;
    nodes = n - 1;
  }
  return DistancePGF(nodes, std::move(counts));
}

std::vector<std::uint64_t> wave_pair_histogram(const ReferralTree& t, unsigned w) {
  std::vector<TreeIndex> members;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t.wave(static_cast<TreeIndex>(i)) == w) members.push_back(static_cast<TreeIndex>(i));
  std::vector<std::uint64_t> hist(2 * static_cast<std::size_t>(w) + 1, 0);
  std::vector<std::int64_t> dist(t.size());
  std::queue<TreeIndex> queue;
  for (TreeIndex s : members) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    queue.push(s);
    while (!queue.empty()) {
      const TreeIndex u = queue.front();
      queue.pop();
      auto visit = [&](TreeIndex v) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          queue.push(v);
        }
      };
      if (t.parent(u) != kNoParent) visit(static_cast<TreeIndex>(t.parent(u)));
      for (TreeIndex c : t.children(u)) visit(c);
    }
    for (TreeIndex v : members) ++hist[static_cast<std::size_t>(dist[v])];
  }
  return hist;
}

ConvexityScan convexity_scan(const DistancePGF& pgf, double lambda_min, double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::Argument, "grid step must be positive");
  if (!(lambda_min >= -1.0 && lambda_min < 1.0)) throw Error(ErrorKind::Argument, "lambda_min must lie in [-1, 1)");
  ConvexityScan scan;
  for (std::size_t k = 0;; ++k) {
    double z = lambda_min + static_cast<double>(k) * step;
    if (z > 1.0 - 1e-12) z = 1.0;
    scan.points.push_back({z, pgf.eval(z).d2g});
    if (z == 1.0) break;
  }
  bool open = false;
  for (const auto& pt : scan.points) {
    const bool negative = pt.d2g < -kConvexityTol;
    if (negative && !open) {
      scan.nonconvex.push_back({pt.z, pt.z});
      open = true;
    } else if (negative) {
      scan.nonconvex.back().hi = pt.z;
    } else {
      open = false;
    }
  }
  return scan;
}

void write_pgf_csv(std::ostream& out, std::size_t tree_id, const DistancePGF& pgf, const ConvexityScan& scan,
                   bool header) {
  if (header) out << "tree_id,z,G,Gpp\n";
  for (const auto& pt : scan.points)
    out << tree_id << ',' << format_double(pt.z) << ',' << format_double(pgf(pt.z)) << ',' << format_double(pt.d2g)
        << '\n';
}

void write_tree_csv(std::ostream& out, const ReferralTree& t) {
  out << "node,parent,wave\n";
  for (std::size_t i = 0; i < t.size(); ++i)
    out << i << ',' << t.parent(static_cast<TreeIndex>(i)) << ',' << t.wave(static_cast<TreeIndex>(i)) << '\n';
}

ReferralTree read_tree_csv(std::istream& in, bool artificial_root) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty tree file");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "node" || header[1] != "parent")
    throw ParseError(1, "expected header node,parent,wave");
  std::vector<std::int64_t> parent;
  std::size_t ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    try {
      if (std::stoull(cells.at(0)) != parent.size()) throw ParseError(ln, "nodes must be listed in order");
      parent.push_back(std::stoll(cells.at(1)));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError(ln, "malformed tree row");
    }
  }
  return ReferralTree(std::move(parent), artificial_root);
}

}  // namespace rdslab
