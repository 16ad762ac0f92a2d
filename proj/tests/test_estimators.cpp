#include <gtest/gtest.h>

#include <json.hpp>

#include "rdslab/errors.hpp"
#include "rdslab/estimators.hpp"
#include "rdslab/spectrum.hpp"
#include "rdslab/variance.hpp"
#include "test_support.hpp"

using namespace rdslab;
using namespace rdslab::testing;

namespace {

std::vector<double> random_vector(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = standard_normal(rng);
  return v;
}

std::vector<double> random_degrees(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = 1.0 + std::floor(uniform01(rng) * 20.0);
  return v;
}

// var_pi(u) - var_pi(P u) with u = (sqrt(m) P - I)^{-1} y by a dense solve.
double dense_sigma0(const Graph& g, std::span<const double> y, unsigned m) {
  const Eigen::Index n = static_cast<Eigen::Index>(g.size());
  const Eigen::MatrixXd p = g.transition_matrix();
  Eigen::VectorXd yv(n), pi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    yv(i) = y[static_cast<std::size_t>(i)];
    pi(i) = g.pi()[static_cast<std::size_t>(i)];
  }
  yv.array() -= pi.dot(yv);
  const Eigen::MatrixXd a = std::sqrt(static_cast<double>(m)) * p - Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd u = a.partialPivLu().solve(yv);
  const Eigen::VectorXd pu = p * u;
  auto var = [&](const Eigen::VectorXd& v) {
    const double mean = pi.dot(v);
    return pi.dot((v.array() - mean).square().matrix());
  };
  return var(u) - var(pu);
}

}  // namespace

TEST(SampleMean, Examples) {
  EXPECT_DOUBLE_EQ(sample_mean(std::vector<double>{1, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(sample_mean(std::vector<double>{0, 1}), 0.5);
  EXPECT_EQ(kind_of([] { sample_mean(std::vector<double>{}); }), ErrorKind::Argument);
}

TEST(Ipw, Examples) {
  const std::vector<double> y{2, 4, 9}, pi(3, 1.0 / 3);
  EXPECT_NEAR(ipw_estimate(y, pi, 3), sample_mean(y), 1e-14);
  const std::vector<double> one{1.0}, center{0.5};
  EXPECT_NEAR(ipw_estimate(one, center, 3), 2.0 / 3.0, 1e-15);
  const std::vector<double> zero{0.0};
  EXPECT_EQ(kind_of([&] { ipw_estimate(one, zero, 3); }), ErrorKind::Domain);
}

TEST(Ipw, UnbiasedUnderStationaryWalks) {
  Rng grng = make_stream(21, 0, 0);
  const Graph g = random_graph(25, 0.15, grng);
  std::vector<double> y = random_vector(g.size(), grng);
  double mu = 0.0;
  for (double v : y) mu += v / static_cast<double>(g.size());
  const auto t = std::make_shared<const ReferralTree>(m_tree(2, 3));
  const int reps = 100000;
  double sum = 0.0, sumsq = 0.0;
  std::vector<NodeId> buf;
  std::vector<double> yo(t->size()), pio(t->size());
  for (int r = 0; r < reps; ++r) {
    Rng rng = make_stream(21, 1, static_cast<std::uint64_t>(r));
    tp_walk_into(g, *t, {}, rng, buf);
    for (std::size_t k = 0; k < buf.size(); ++k) {
      yo[k] = y[buf[k]];
      pio[k] = g.pi()[buf[k]];
    }
    const double est = ipw_estimate(yo, pio, g.size());
    sum += est;
    sumsq += est * est;
  }
  const double mean = sum / reps, se = std::sqrt((sumsq / reps - mean * mean) / reps);
  EXPECT_NEAR(mean, mu, 3 * se);
}

TEST(HarmonicMean, Examples) {
  EXPECT_DOUBLE_EQ(harmonic_mean_degree(std::vector<double>{4, 4, 4}), 4.0);
  EXPECT_DOUBLE_EQ(harmonic_mean_degree(std::vector<double>{1, 3}), 1.5);
  EXPECT_EQ(kind_of([] { harmonic_mean_degree(std::vector<double>{1, 0}); }), ErrorKind::Domain);
}

TEST(HarmonicMean, ConsistentForMeanDegree) {
  Rng grng = make_stream(22, 0, 0);
  const Graph g = random_graph(300, 0.03, grng, false);
  const double dbar = g.mean_degree();
  const auto big = m_tree(2, 12);
  std::vector<double> rmse;
  for (std::size_t n : {50, 500, 5000}) {
    const auto t = big.prefix(n);
    double acc = 0.0;
    std::vector<NodeId> buf;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
      Rng rng = make_stream(22, n, static_cast<std::uint64_t>(r));
      tp_walk_into(g, t, {}, rng, buf);
      std::vector<double> deg(buf.size());
      for (std::size_t k = 0; k < buf.size(); ++k) deg[k] = g.degrees()[buf[k]];
      const double e = harmonic_mean_degree(deg) - dbar;
      acc += e * e / reps;
    }
    rmse.push_back(std::sqrt(acc));
  }
  EXPECT_GT(rmse[0], rmse[1]);
  EXPECT_GT(rmse[1], rmse[2]);
  EXPECT_LT(rmse[2] / dbar, 0.02);
}

TEST(Vh, Examples) {
  const std::vector<double> y{1, 0}, deg{1, 2};
  EXPECT_NEAR(vh_estimate(y, deg), 2.0 / 3.0, 1e-15);
  const std::vector<double> y3{3, 5, 10}, d3(3, 7.0);
  EXPECT_NEAR(vh_estimate(y3, d3), sample_mean(y3), 1e-14);
  EXPECT_EQ(kind_of([] { vh_estimate(std::vector<double>{1}, std::vector<double>{0}); }), ErrorKind::Domain);
  EXPECT_EQ(kind_of([] { vh_estimate(std::vector<double>{1, 2}, std::vector<double>{1}); }), ErrorKind::Dimension);
}

TEST(Vh, AffineEquivarianceAndSimplex) {
  Rng rng = make_stream(23, 0, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1 + static_cast<std::size_t>(uniform01(rng) * 40);
    std::vector<double> y = random_vector(n, rng);
    const auto deg = random_degrees(n, rng);
    const double base = vh_estimate(y, deg);
    for (double& v : y) v += 7.0;
    EXPECT_NEAR(vh_estimate(y, deg), base + 7.0, 1e-12);
    const auto w = vh_weights(deg);
    double sum = 0.0;
    for (double x : w) {
      EXPECT_GE(x, 0.0);
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(BiasFeature, Examples) {
  const std::vector<double> y{2, -1, 5}, deg(3, 4.0);
  for (double v : bias_feature(y, deg, 4.0)) EXPECT_DOUBLE_EQ(v, 0.0);
  const std::vector<double> ones{1, 1}, d12{1, 2};
  const double dbar = harmonic_mean_degree(d12);
  EXPECT_NEAR(dbar, 4.0 / 3.0, 1e-15);
  const auto yp = bias_feature(ones, d12, dbar);
  EXPECT_NEAR(yp[0], -1.0 / 3.0, 1e-15);
  EXPECT_NEAR(yp[1], 1.0 / 3.0, 1e-15);
  EXPECT_EQ(kind_of([] { bias_feature(std::vector<double>{1}, std::vector<double>{0}, 1.0); }), ErrorKind::Domain);
}

TEST(BiasFeature, ExactExpectationIsTheBias) {
  Rng rng = make_stream(24, 0, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const Graph g = random_graph(5, 0.5, rng);
    const auto y = random_vector(5, rng);
    const auto yp = bias_feature(y, g.degrees(), g.mean_degree());
    double mu = 0.0;
    for (double v : y) mu += v / 5.0;
    EXPECT_NEAR(pi_mean(yp, g.pi()), pi_mean(y, g.pi()) - mu, 1e-12);
  }
}

TEST(BiasFeature, UncorrelatedWeightsGiveZeroBias) {
  Rng rng = make_stream(25, 0, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const Graph g = random_graph(8, 0.4, rng);
    auto y = random_vector(8, rng);
    // Project y off (pi - 1/N) so that sum pi_i y_i = (1/N) sum y_i.
    std::vector<double> u(8);
    double uy = 0.0, uu = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
      u[i] = g.pi()[i] - 1.0 / 8;
      uy += u[i] * y[i];
      uu += u[i] * u[i];
    }
    for (std::size_t i = 0; i < 8; ++i) y[i] -= uy / uu * u[i];
    EXPECT_NEAR(pi_mean(bias_feature(y, g.degrees(), g.mean_degree()), g.pi()), 0.0, 1e-12);
  }
}

TEST(BiasTest, Examples) {
  EXPECT_NEAR(critical_value(), 1.959964, 1e-6);
  EXPECT_NEAR(critical_value(0.1), 1.644854, 1e-6);
  const auto zero = bias_test(0.0, 0.4);
  EXPECT_FALSE(zero.reject);
  EXPECT_DOUBLE_EQ(zero.z, 0.0);
  const double s2 = 0.09;
  const auto two = bias_test(2.0 * std::sqrt(s2), s2);
  EXPECT_TRUE(two.reject);
  EXPECT_NEAR(two.z, 2.0, 1e-14);
  EXPECT_FALSE(bias_test(1.95 * std::sqrt(s2), s2).reject);
  EXPECT_TRUE(bias_test(-1.97 * std::sqrt(s2), s2).reject);
}

TEST(BiasTest, DegenerateVariance) {
  const auto d = bias_test(0.1, 0.0);
  EXPECT_TRUE(d.reject);
  EXPECT_TRUE(d.degenerate);
  EXPECT_TRUE(std::isinf(d.z));
  const auto z = bias_test(0.0, 0.0);
  EXPECT_FALSE(z.reject);
  EXPECT_FALSE(z.degenerate);
  EXPECT_EQ(kind_of([] { bias_test(0.1, -1.0); }), ErrorKind::Argument);
  EXPECT_EQ(kind_of([] { critical_value(0.0); }), ErrorKind::Argument);
}

TEST(BiasTest, SizeOnConstantDegreeGraph) {
  // Every sampled degree equals the common degree, so y'_VH vanishes
  // identically and bias_hat = 0 in each replication.
  const Graph g = cycle_graph(200);
  std::vector<double> y(g.size());
  Rng yrng = make_stream(26, 0, 0);
  for (double& v : y) v = uniform01(yrng) < 0.5 ? 1.0 : 0.0;
  const auto t = std::make_shared<const ReferralTree>(m_tree(2, 6));
  const auto pgf = distance_pgf(*t);
  int rejects = 0;
  const int reps = 2000;
  for (int r = 0; r < reps; ++r) {
    Rng rng = make_stream(26, 1, static_cast<std::uint64_t>(r));
    auto s = tp_walk(g, t, {}, rng);
    const auto& yo = observe_feature(s, y);
    const auto yp = bias_feature(yo, s.deg_obs, harmonic_mean_degree(s.deg_obs));
    WalkSample sp = s;
    sp.y_obs = yp;
    const double var = plugin_variance(sp, yp, pgf).sigma_hat_sq;
    rejects += bias_test(bias_statistic(yo, s.deg_obs), var).reject;
  }
  const double rate = static_cast<double>(rejects) / reps;
  std::printf("size on constant-degree graph: %.4f\n", rate);
  EXPECT_NEAR(rate, 0.05, 0.02);
}

TEST(BiasAdjusted, Thresholding) {
  EXPECT_EQ(bias_adjusted(1.0, 2.0, false), 1.0);
  EXPECT_EQ(bias_adjusted(1.0, 2.0, true), 2.0);
}

TEST(EstimateReport, IdentitiesAndArms) {
  Rng rng = make_stream(27, 0, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + static_cast<std::size_t>(uniform01(rng) * 50);
    const auto y = random_vector(n, rng);
    const auto deg = random_degrees(n, rng);
    const double s2 = 0.01 * uniform01(rng);
    const auto r = make_estimate_report(y, deg, s2);
    EXPECT_NEAR(bias_statistic(y, deg), sample_mean(y) - vh_estimate(y, deg), 1e-12);
    EXPECT_NEAR(r.bias_hat, sample_mean(y) - vh_estimate(y, deg), 1e-12);
    EXPECT_TRUE(r.mu_ba == r.mu_hat || r.mu_ba == r.mu_vh);
    EXPECT_EQ(r.mu_ba, r.reject ? r.mu_vh : r.mu_hat);
    EXPECT_EQ(r.arm, WeightedArm::VH);
    EXPECT_FALSE(r.mu_ipw.has_value());
  }
  const std::vector<double> y{1, 0, 1}, deg{2, 2, 2}, pi{0.25, 0.25, 0.5};
  const auto r = make_estimate_report(y, deg, 0.0, 0.05, std::span<const double>(pi), 4);
  ASSERT_TRUE(r.mu_ipw.has_value());
  EXPECT_EQ(r.arm, WeightedArm::IPW);
  EXPECT_DOUBLE_EQ(r.mu_hat, r.mu_vh);
  EXPECT_FALSE(r.reject);
  EXPECT_EQ(kind_of([&] { make_estimate_report(y, deg, 0.0, 0.05, std::nullopt, 0, WeightedArm::IPW); }),
            ErrorKind::Argument);
}

TEST(EstimateReport, ConstantDegreeCollapse) {
  const std::vector<double> y{3, 1, 4, 1, 5}, deg(5, 6.0), pi(5, 0.1);
  const auto r = make_estimate_report(y, deg, 0.2, 0.05, std::span<const double>(pi), 10);
  EXPECT_DOUBLE_EQ(r.mu_hat, r.mu_vh);
  EXPECT_NEAR(*r.mu_ipw, r.mu_hat, 1e-15);
  EXPECT_EQ(r.bias_hat, 0.0);
  const std::vector<double> d3(5, 3.0);
  EXPECT_EQ(bias_statistic(y, d3), 0.0);
  EXPECT_FALSE(make_estimate_report(y, d3, 0.0).reject);
}

TEST(EstimateReport, Json) {
  const std::vector<double> y{1, 0, 1, 1}, deg{1, 2, 3, 4};
  const auto j = nlohmann::json::parse(to_json(make_estimate_report(y, deg, 0.001)));
  for (const char* key : {"n", "mu_hat", "mu_ipw", "mu_vh", "dbar_hat", "bias_hat", "sigma_hat_sq", "z", "reject",
                          "mu_ba", "convention"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["convention"], "var_of_mean");
  EXPECT_TRUE(j["mu_ipw"].is_null());
  EXPECT_EQ(j["n"], 4);
}

TEST(WaveStatistic, ZeroAndChain) {
  const Graph g = complete_graph(4);
  Rng rng = make_stream(28, 0, 0);
  const auto t = std::make_shared<const ReferralTree>(m_tree(2, 4));
  const auto s = tp_walk(g, t, {}, rng);
  const std::vector<double> zero(4, 0.0), pi(g.pi().begin(), g.pi().end());
  const auto w0 = wave_statistic(s, zero, pi, 2);
  ASSERT_EQ(w0.y_wave.size(), 4u);
  for (double v : w0.y_wave) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(w0.t, 0.0);
  EXPECT_FALSE(w0.approximate);

  const auto chain = std::make_shared<const ReferralTree>(m_tree(1, 6));
  const auto sc = tp_walk(g, chain, {}, rng);
  const std::vector<double> y{1.5, -0.5, -0.5, -0.5};
  const auto w = wave_statistic(sc, y, pi, 1);
  double total = 0.0;
  for (unsigned i = 1; i <= 6; ++i) {
    EXPECT_NEAR(w.y_wave[i - 1], y[sc.assignment[i]], 1e-15);
    total += y[sc.assignment[i]];
  }
  EXPECT_NEAR(w.t, total / std::sqrt(6.0), 1e-14);
  EXPECT_EQ(kind_of([&] { wave_statistic(s, y, pi, 3); }), ErrorKind::Shape);
  EXPECT_TRUE(wave_statistic(s, y, 2).approximate);
}

TEST(WaveStatistic, ScalesWaveSums) {
  const Graph g = complete_graph(5);
  Rng rng = make_stream(29, 0, 0);
  const auto t = std::make_shared<const ReferralTree>(m_tree(3, 3));
  const auto s = tp_walk(g, t, {}, rng);
  const std::vector<double> y{1, 2, 3, 4, 5}, pi(g.pi().begin(), g.pi().end());
  const auto w = wave_statistic(s, y, pi, 3);
  std::vector<double> sums(3, 0.0);
  for (TreeIndex i = 1; i < t->size(); ++i) sums[t->wave(i) - 1] += y[s.assignment[i]] - 3.0;
  for (unsigned k = 1; k <= 3; ++k) EXPECT_NEAR(w.y_wave[k - 1], sums[k - 1] / std::pow(3.0, k / 2.0), 1e-12);
}

TEST(Sigma0, ZeroEigenvalueComponent) {
  // P = J/4 + (lambda/4) s s^T with s = (1,1,-1,-1): spectrum {1, lambda, 0, 0}.
  const double lambda = 0.5;
  Eigen::MatrixXd p = Eigen::MatrixXd::Constant(4, 4, 0.25);
  const Eigen::Vector4d sgn(1, 1, -1, -1);
  p += lambda / 4 * sgn * sgn.transpose();
  const std::vector<double> pi(4, 0.25);
  const Spectrum spec = spectral_decomposition(p, pi);
  ASSERT_NEAR(spec.lambda2(), lambda, 1e-14);
  ASSERT_NEAR(spec.eigenvalues[2], 0.0, 1e-14);
  const double sigma = 1.7;
  std::vector<double> y(4);
  for (std::size_t i = 0; i < 4; ++i) y[i] = sigma * spec.f(2)[i];
  for (unsigned m : {1u, 2u, 3u}) EXPECT_NEAR(theorem1_sigma0(spec, y, m), sigma * sigma, 1e-12);
}

TEST(Sigma0, ChainReduction) {
  for (double lambda : {0.2, 0.5, 0.8}) {
    const Graph g = block_graph8(4.0, block_graph8_between(4.0, lambda));
    const Spectrum spec = spectral_decomposition(g);
    const double sigma = 0.6;
    std::vector<double> y(8);
    for (std::size_t i = 0; i < 8; ++i) y[i] = sigma * spec.f(1)[i];
    EXPECT_NEAR(theorem1_sigma0(spec, y, 1), sigma * sigma * (1 + lambda) / (1 - lambda), 1e-10);
  }
}

TEST(Sigma0, ChainMonteCarlo) {
  // m = 1: Var(T_h) of the chain CLT statistic approaches (1 + lambda) / (1 - lambda).
  const double lambda = 0.5;
  const Graph g = block_graph8(4.0, block_graph8_between(4.0, lambda));
  const Spectrum spec = spectral_decomposition(g);
  const std::vector<double> y(spec.f(1).begin(), spec.f(1).end());
  const auto t = std::make_shared<const ReferralTree>(m_tree(1, 400));
  const std::vector<double> pi(g.pi().begin(), g.pi().end());
  const int reps = 20000;
  std::vector<double> ts(reps);
  for (int r = 0; r < reps; ++r) {
    Rng rng = make_stream(30, 0, static_cast<std::uint64_t>(r));
    ts[static_cast<std::size_t>(r)] = wave_statistic(tp_walk(g, t, {}, rng), y, pi, 1).t;
  }
  double m2 = 0.0, m4 = 0.0;
  for (double v : ts) {
    m2 += v * v / reps;
    m4 += v * v * v * v / reps;
  }
  const double exact = wave_statistic_variance(spec, y, 1, 400);
  EXPECT_NEAR(m2, exact, 3 * std::sqrt((m4 - m2 * m2) / reps));
  EXPECT_NEAR(exact, theorem1_sigma0(spec, y, 1), 0.02);
}

TEST(Sigma0, TrivialAndThreshold) {
  const Graph g = block_graph8(4.0, block_graph8_between(4.0, 0.5));
  const Spectrum spec = spectral_decomposition(g);
  const std::vector<double> c(8, 3.0);
  EXPECT_NEAR(theorem1_sigma0(spec, c, 2), 0.0, 1e-20);
  const std::vector<double> y(spec.f(1).begin(), spec.f(1).end());
  EXPECT_NO_THROW(theorem1_sigma0(spec, y, 3));
  EXPECT_EQ(kind_of([&] { theorem1_sigma0(spec, y, 5); }), ErrorKind::Threshold);
  const Spectrum bip = spectral_decomposition(cycle_graph(4));
  const std::vector<double> yb{1, -1, 1, -1};
  EXPECT_EQ(kind_of([&] { theorem1_sigma0(bip, yb, 1); }), ErrorKind::Threshold);
}

TEST(Sigma0, MatchesDenseSolve) {
  Rng rng = make_stream(31, 0, 0);
  int checked = 0;
  while (checked < 20) {
    const Graph g = random_graph(12, 0.6, rng);
    const Spectrum spec = spectral_decomposition(g);
    const auto y = random_vector(g.size(), rng);
    for (unsigned m = 1; m <= 4; ++m) {
      if (m * spec.lambda2() * spec.lambda2() >= 1.0) continue;
      EXPECT_NEAR(theorem1_sigma0(spec, y, m), dense_sigma0(g, y, m), 1e-8);
      ++checked;
    }
  }
}
