#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "rdslab/rng.hpp"

namespace rdslab {

using TreeIndex = std::uint32_t;
inline constexpr std::int64_t kNoParent = -1;
inline constexpr std::size_t kDefaultTreeCap = 1'000'000;

/// Rooted tree indexing the sample. Node 0 is the root and every other node's
/// parent has a smaller index, so index order visits parents before children.
class ReferralTree {
 public:
  /// parent[0] must be -1 and parent[i] < i for i > 0.
  explicit ReferralTree(std::vector<std::int64_t> parent, bool artificial_root = false);

  std::size_t size() const noexcept { return parent_.size(); }
  std::int64_t parent(TreeIndex i) const noexcept { return parent_[i]; }
  unsigned wave(TreeIndex i) const noexcept { return wave_[i]; }
  std::size_t offspring(TreeIndex i) const noexcept { return child_offsets_[i + 1] - child_offsets_[i]; }
  std::span<const TreeIndex> children(TreeIndex i) const noexcept {
    return {children_.data() + child_offsets_[i], offspring(i)};
  }
  unsigned height() const noexcept { return height_; }
  bool artificial_root() const noexcept { return artificial_root_; }

  std::span<const std::int64_t> parents() const noexcept { return parent_; }
  std::span<const unsigned> waves() const noexcept { return wave_; }
  std::vector<std::size_t> wave_sizes() const;

  /// True for a complete m-ary tree (every node above the last wave has
  /// exactly m children).
  bool is_m_tree(unsigned m) const noexcept;

  /// First n nodes in index order.
  ReferralTree prefix(std::size_t n) const;

 private:
  std::vector<std::int64_t> parent_;
  std::vector<unsigned> wave_;
  std::vector<std::size_t> child_offsets_;
  std::vector<TreeIndex> children_;
  unsigned height_ = 0;
  bool artificial_root_ = false;
};

ReferralTree m_tree(unsigned m, unsigned h, std::size_t cap = kDefaultTreeCap);

/// Offspring law over {0, ..., K}.
class OffspringLaw {
 public:
  explicit OffspringLaw(std::vector<double> probabilities);
  std::size_t draw(Rng& rng) const noexcept;
  double mean() const noexcept;
  double extinction_free_mass() const noexcept { return 1.0 - probs_.front(); }
  std::span<const double> probabilities() const noexcept { return probs_; }

 private:
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

/// Galton-Watson tree grown breadth first through waves 0..max_wave. An
/// extinct tree is returned as is.
ReferralTree galton_watson_waves(const OffspringLaw& law, unsigned max_wave, Rng& rng,
                                 std::size_t cap = kDefaultTreeCap);

inline constexpr unsigned kDefaultRestartBudget = 1000;

/// Galton-Watson tree grown wave by wave until a completed wave brings the
/// total to at least `node_cap`; extinct attempts are discarded and regrown.
ReferralTree galton_watson_capped(const OffspringLaw& law, std::size_t node_cap, Rng& rng,
                                  unsigned restart_budget = kDefaultRestartBudget,
                                  std::size_t hard_cap = kDefaultTreeCap);

/// New root whose children are the roots of `subtrees`; flagged artificial.
ReferralTree attach_artificial_root(std::span<const ReferralTree> subtrees);

/// Generating function of the distance D between two nodes drawn uniformly
/// and independently from the tree: G(z) = sum_d (c_d / n^2) z^d, with c_d
/// the number of ordered pairs at distance d.
class DistancePGF {
 public:
  DistancePGF(std::size_t n, std::vector<std::uint64_t> counts);

  std::size_t n() const noexcept { return n_; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::size_t max_distance() const noexcept { return counts_.size() - 1; }

  struct Value {
    double g = 0.0;
    double dg = 0.0;
    double d2g = 0.0;
  };
  Value eval(double z) const noexcept;
  double operator()(double z) const noexcept { return eval(z).g; }

 private:
  std::size_t n_;
  std::vector<std::uint64_t> counts_;
};

/// Exact ordered-pair distance histogram. With `include_artificial_root`
/// false, pairs touching an artificial root are dropped (distances between
/// remaining nodes still pass through it).
DistancePGF distance_pgf(const ReferralTree& t, bool include_artificial_root = true,
                         std::size_t cap = kDefaultTreeCap);

/// Ordered-pair distance histogram restricted to nodes on wave `w`.
std::vector<std::uint64_t> wave_pair_histogram(const ReferralTree& t, unsigned w);

struct ConvexityScan {
  struct Point {
    double z;
    double d2g;
  };
  struct Interval {
    double lo;
    double hi;
  };
  std::vector<Point> points;
  std::vector<Interval> nonconvex;
  bool convex() const noexcept { return nonconvex.empty(); }
};

inline constexpr double kConvexityTol = 1e-12;

/// Evaluates G'' on lambda_min, lambda_min + step, ..., 1 and reports maximal
/// runs of grid points with G'' < -1e-12.
ConvexityScan convexity_scan(const DistancePGF& pgf, double lambda_min, double step = 0.01);

/// Rows "tree_id,z,G,Gpp" over the scan grid.
void write_pgf_csv(std::ostream& out, std::size_t tree_id, const DistancePGF& pgf, const ConvexityScan& scan,
                   bool header = true);

void write_tree_csv(std::ostream& out, const ReferralTree& t);
ReferralTree read_tree_csv(std::istream& in, bool artificial_root = false);

}  // namespace rdslab
