#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "rdslab/errors.hpp"
#include "rdslab/spectrum.hpp"
#include "rdslab/walk.hpp"
#include "test_support.hpp"

using namespace rdslab;
using namespace rdslab::testing;

namespace {

std::shared_ptr<const ReferralTree> share(ReferralTree t) { return std::make_shared<const ReferralTree>(std::move(t)); }

void expect_follows_edges(const Graph& g, const WalkSample& s) {
  ASSERT_EQ(s.assignment.size(), s.tree->size());
  for (TreeIndex i = 1; i < s.tree->size(); ++i) {
    const auto p = static_cast<std::size_t>(s.tree->parent(i));
    EXPECT_GT(g.weight(s.assignment[p], s.assignment[i]), 0.0);
  }
}

// Exact cov(y(X_s), y(X_t)) at tree distance d under stationary init:
// sum_ij pi_i (P^d)_ij y_i y_j - E_pi(y)^2.
double matrix_pair_covariance(const Graph& g, std::span<const double> y, unsigned d) {
  const Eigen::MatrixXd pd = matrix_power(g.transition_matrix(), d);
  double acc = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    mean += g.pi()[i] * y[i];
    for (std::size_t j = 0; j < g.size(); ++j)
      acc += g.pi()[i] * pd(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * y[i] * y[j];
  }
  return acc - mean * mean;
}

}  // namespace

TEST(TpWalk, ChainOnTwoNodesAlternates) {
  const Graph g = graph_of({{0, 1, 1.0}});
  Rng rng = make_stream(1, 0, 0);
  const auto s = tp_walk(g, share(m_tree(1, 9)), {}, rng);
  for (std::size_t i = 1; i < s.assignment.size(); ++i) EXPECT_NE(s.assignment[i], s.assignment[i - 1]);
}

TEST(TpWalk, CompleteGraphUniformMarginal) {
  const Graph g = complete_graph(5);
  const auto t = share(m_tree(2, 3));
  std::vector<double> count(5, 0.0);
  const int reps = 20000;
  for (int r = 0; r < reps; ++r) {
    Rng rng = make_stream(2, 0, static_cast<std::uint64_t>(r));
    const auto s = tp_walk(g, t, {}, rng);
    expect_follows_edges(g, s);
    count[s.assignment[9]] += 1.0 / reps;
  }
  for (double c : count) EXPECT_NEAR(c, 0.2, 3 * std::sqrt(0.2 * 0.8 / reps));
}

TEST(TpWalk, TransitionFrequenciesMatchRows) {
  Rng grng = make_stream(3, 0, 0);
  const Graph g = random_graph(6, 0.5, grng);
  const auto t = share(m_tree(2, 9));
  const Eigen::MatrixXd p = g.transition_matrix();
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(6, 6);
  std::size_t pairs = 0;
  for (std::uint64_t r = 0; pairs < 100000; ++r) {
    Rng rng = make_stream(3, 1, r);
    const auto s = tp_walk(g, t, {}, rng);
    for (TreeIndex i = 1; i < t->size(); ++i, ++pairs)
      counts(s.assignment[static_cast<std::size_t>(t->parent(i))], s.assignment[i]) += 1.0;
  }
  for (Eigen::Index i = 0; i < 6; ++i) {
    const double row = counts.row(i).sum();
    for (Eigen::Index j = 0; j < 6; ++j) {
      const double se = std::sqrt(p(i, j) * (1 - p(i, j)) / row);
      EXPECT_NEAR(counts(i, j) / row, p(i, j), 3 * se + 1e-15) << i << "," << j;
    }
  }
}

TEST(TpWalk, StationaryMarginalAtFixedNode) {
  Rng grng = make_stream(4, 0, 0);
  const Graph g = random_graph(7, 0.4, grng);
  const auto t = share(m_tree(2, 4));
  const int reps = 100000;
  std::vector<double> freq(g.size(), 0.0);
  std::vector<NodeId> buf;
  for (int r = 0; r < reps; ++r) {
    Rng rng = make_stream(4, 1, static_cast<std::uint64_t>(r));
    tp_walk_into(g, *t, {}, rng, buf);
    freq[buf[20]] += 1.0 / reps;
  }
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_NEAR(freq[i], g.pi()[i], 3 * std::sqrt(g.pi()[i] * (1 - g.pi()[i]) / reps));
}

TEST(TpWalk, PairCovarianceMatchesSpectralFormula) {
  Rng grng = make_stream(5, 0, 0);
  const Graph g = random_graph(8, 0.3, grng);
  const Spectrum spec = spectral_decomposition(g);
  std::vector<double> y(g.size());
  for (double& v : y) v = standard_normal(grng);
  const auto t = share(m_tree(2, 3));
  // Node pairs (0,1): d=1, (1,2): d=2, (3,5): d=3 [3 under 1, 5 under 2], (7,14): d=6.
  const std::vector<std::pair<TreeIndex, TreeIndex>> pairs{{0, 1}, {1, 2}, {3, 5}, {7, 14}};
  const auto dist = tree_distances(*t);
  const int reps = 100000;
  std::vector<std::vector<double>> a(pairs.size()), b(pairs.size());
  std::vector<NodeId> buf;
  for (int r = 0; r < reps; ++r) {
    Rng rng = make_stream(5, 1, static_cast<std::uint64_t>(r));
    tp_walk_into(g, *t, {}, rng, buf);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      a[k].push_back(y[buf[pairs[k].first]]);
      b[k].push_back(y[buf[pairs[k].second]]);
    }
  }
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const unsigned d = static_cast<unsigned>(dist[pairs[k].first][pairs[k].second]);
    double ma = 0, mb = 0;
    for (int r = 0; r < reps; ++r) {
      ma += a[k][r] / reps;
      mb += b[k][r] / reps;
    }
    std::vector<double> prod(reps);
    double cov = 0.0;
    for (int r = 0; r < reps; ++r) cov += (prod[r] = (a[k][r] - ma) * (b[k][r] - mb)) / (reps - 1);
    double v = 0.0;
    for (int r = 0; r < reps; ++r) v += (prod[r] - cov) * (prod[r] - cov) / (reps - 1);
    double lemma = 0.0;
    const auto c = spec.coefficients(y);
    for (std::size_t l = 1; l < spec.size(); ++l) lemma += std::pow(spec.eigenvalues[l], d) * c[l] * c[l];
    EXPECT_NEAR(lemma, matrix_pair_covariance(g, y, d), 1e-10);
    EXPECT_NEAR(cov, lemma, 3 * std::sqrt(v / reps)) << "d=" << d;
  }
}

TEST(TpWalk, RootModes) {
  const Graph g = complete_graph(4);
  const auto t = share(m_tree(2, 2));
  Rng rng = make_stream(6, 0, 0);
  EXPECT_EQ(tp_walk(g, t, {RootInit::Fixed, 3}, rng).assignment[0], 3u);
  EXPECT_EQ(kind_of([&] { tp_walk(g, t, {RootInit::Fixed, 9}, rng); }), ErrorKind::Argument);
  std::set<NodeId> roots;
  for (int r = 0; r < 200; ++r) roots.insert(tp_walk(g, t, {RootInit::Uniform, 0}, rng).assignment[0]);
  EXPECT_EQ(roots.size(), 4u);
}

TEST(TpWalk, Deterministic) {
  Rng grng = make_stream(7, 0, 0);
  const Graph g = random_graph(30, 0.1, grng);
  const auto t = share(m_tree(3, 3));
  for (auto mode : {Replacement::With, Replacement::Without}) {
    Rng a = make_stream(7, 1, 5), b = make_stream(7, 1, 5);
    const auto sa = mode == Replacement::With ? tp_walk(g, t, {}, a) : tp_walk_without_replacement(g, t, {}, a);
    const auto sb = mode == Replacement::With ? tp_walk(g, t, {}, b) : tp_walk_without_replacement(g, t, {}, b);
    EXPECT_EQ(sa.assignment, sb.assignment);
    EXPECT_EQ(sa.truncations, sb.truncations);
  }
}

TEST(WithoutReplacement, StarFromHub) {
  const Graph g = star_graph(3);
  for (std::uint64_t r = 0; r < 50; ++r) {
    Rng rng = make_stream(8, 0, r);
    const auto s = tp_walk_without_replacement(g, share(m_tree(2, 1)), {RootInit::Fixed, 0}, rng);
    ASSERT_EQ(s.assignment.size(), 3u);
    EXPECT_EQ(s.truncations, 0u);
    EXPECT_NE(s.assignment[1], 0u);
    EXPECT_NE(s.assignment[2], 0u);
    EXPECT_NE(s.assignment[1], s.assignment[2]);
  }
}

TEST(WithoutReplacement, CompleteGraphChain) {
  const Graph g = complete_graph(4);
  Rng rng = make_stream(9, 0, 0);
  const auto s = tp_walk_without_replacement(g, share(m_tree(1, 3)), {}, rng);
  EXPECT_EQ(std::set<NodeId>(s.assignment.begin(), s.assignment.end()).size(), 4u);
  EXPECT_EQ(s.truncations, 0u);
}

TEST(WithoutReplacement, TriangleTruncates) {
  const Graph g = complete_graph(3);
  Rng rng = make_stream(10, 0, 0);
  const auto s = tp_walk_without_replacement(g, share(m_tree(2, 2)), {}, rng);
  EXPECT_GE(s.truncations, 4u);
  EXPECT_EQ(s.tree->size(), 3u);
  EXPECT_EQ(s.observed(), 3u);
  EXPECT_EQ(s.deg_obs.size(), 3u);
  expect_follows_edges(g, s);
}

TEST(WithoutReplacement, InjectiveAndConsistent) {
  Rng grng = make_stream(11, 0, 0);
  const Graph g = random_graph(40, 0.06, grng, false);
  const auto t = share(m_tree(2, 5));
  for (std::uint64_t r = 0; r < 100; ++r) {
    Rng rng = make_stream(11, 1, r);
    const auto s = tp_walk_without_replacement(g, t, {}, rng);
    EXPECT_EQ(std::set<NodeId>(s.assignment.begin(), s.assignment.end()).size(), s.assignment.size());
    EXPECT_LE(s.tree->size(), t->size());
    expect_follows_edges(g, s);
  }
}

TEST(WithoutReplacement, UniformAmongUnsampledNeighbors) {
  // Hub 0 with leaves 1..4: the two children of the root are a uniform pair.
  const Graph g = star_graph(4);
  const auto t = share(m_tree(2, 1));
  std::vector<double> second(5, 0.0);
  const int reps = 40000;
  for (int r = 0; r < reps; ++r) {
    Rng rng = make_stream(12, 0, static_cast<std::uint64_t>(r));
    second[tp_walk_without_replacement(g, t, {RootInit::Fixed, 0}, rng).assignment[2]] += 1.0 / reps;
  }
  for (NodeId v = 1; v <= 4; ++v) EXPECT_NEAR(second[v], 0.25, 3 * std::sqrt(0.25 * 0.75 / reps));
}

TEST(WithoutReplacement, ArtificialRootDoesNotOccupyNode) {
  const Graph g = graph_of({{0, 1, 1.0}});
  const std::vector<ReferralTree> seeds(1, ReferralTree({-1}));
  const auto t = share(attach_artificial_root(seeds));
  Rng rng = make_stream(13, 0, 0);
  const auto s = tp_walk_without_replacement(g, t, {RootInit::Fixed, 0}, rng);
  EXPECT_EQ(s.truncations, 0u);
  EXPECT_EQ(s.assignment[1], 1u);
}

TEST(ObserveFeature, ConstantAndMissing) {
  const Graph g = complete_graph(4);
  Rng rng = make_stream(14, 0, 0);
  auto s = tp_walk(g, share(m_tree(2, 3)), {}, rng);
  const std::vector<double> c(4, 2.5);
  for (double v : observe_feature(s, c)) EXPECT_EQ(v, 2.5);
  std::vector<double> holes(4, 1.0);
  holes[s.assignment[0]] = std::nan("");
  EXPECT_EQ(kind_of([&] { observe_feature(s, holes); }), ErrorKind::Data);
  const std::vector<double> short_y(2, 1.0);
  s.assignment[0] = 3;
  EXPECT_EQ(kind_of([&] { observe_feature(s, short_y); }), ErrorKind::Data);
}

TEST(ObserveFeature, SkipsArtificialRoot) {
  const Graph g = complete_graph(4);
  const std::vector<ReferralTree> seeds{m_tree(2, 1), m_tree(1, 2)};
  Rng rng = make_stream(15, 0, 0);
  auto s = tp_walk(g, share(attach_artificial_root(seeds)), {}, rng);
  const std::vector<double> y{0, 1, 2, 3};
  const auto& obs = observe_feature(s, y);
  ASSERT_EQ(obs.size(), 6u);
  EXPECT_EQ(s.deg_obs.size(), 6u);
  for (std::size_t k = 0; k < obs.size(); ++k) EXPECT_EQ(obs[k], y[s.assignment[k + 1]]);
  EXPECT_EQ(observed_nodes(s).size(), 6u);
}

TEST(ObserveFeature, BlockIndicatorMean) {
  Rng grng = make_stream(16, 0, 0);
  const SbmGraph sbm = sbm_sample(300, 0.06, 0.02, grng);
  std::vector<double> y(sbm.graph.size());
  double target = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = sbm.block[i] == 1 ? 1.0 : 0.0;
    target += sbm.graph.pi()[i] * y[i];
  }
  const auto t = share(m_tree(2, 5));
  double sum = 0.0, sumsq = 0.0;
  const int reps = 4000;
  for (int r = 0; r < reps; ++r) {
    Rng rng = make_stream(16, 1, static_cast<std::uint64_t>(r));
    auto s = tp_walk(sbm.graph, t, {}, rng);
    double m = 0.0;
    for (double v : observe_feature(s, y)) m += v / static_cast<double>(s.observed());
    sum += m;
    sumsq += m * m;
  }
  const double mean = sum / reps, var = sumsq / reps - mean * mean;
  EXPECT_NEAR(mean, target, 3 * std::sqrt(var / reps));
}

TEST(ObserveFeature, LagOneAutocorrelationOfF2) {
  const double lambda = 0.5;
  const Graph g = block_graph8(4.0, block_graph8_between(4.0, lambda));
  const Spectrum spec = spectral_decomposition(g);
  ASSERT_NEAR(spec.lambda2(), lambda, 1e-12);
  const std::vector<double> f2(spec.f(1).begin(), spec.f(1).end());
  const auto t = share(m_tree(1, 199));
  double acc = 0.0, norm = 0.0;
  for (std::uint64_t r = 0; r < 500; ++r) {
    Rng rng = make_stream(17, 0, r);
    auto s = tp_walk(g, t, {}, rng);
    const auto& y = observe_feature(s, f2);
    for (std::size_t k = 1; k < y.size(); ++k) acc += y[k] * y[k - 1];
    for (double v : y) norm += v * v;
  }
  EXPECT_NEAR(acc / norm, lambda, 0.02);
}

TEST(WalkCsv, Header) {
  const Graph g = graph_of({{0, 1, 1.0}, {1, 2, 1.0}});
  Rng rng = make_stream(18, 0, 0);
  auto s = tp_walk(g, share(m_tree(1, 2)), {RootInit::Fixed, 1}, rng);
  const std::vector<double> y{5, 6, 7};
  observe_feature(s, y);
  std::stringstream ss;
  write_walk_csv(ss, s, g);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "tree_node,graph_node,wave,y,deg");
  std::getline(ss, line);
  EXPECT_EQ(line, "0,1,0,6,2");
}
