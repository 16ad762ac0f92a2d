#include "rdslab/blockmodel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "rdslab/errors.hpp"
#include "rdslab/spectrum.hpp"

namespace rdslab {
namespace {

constexpr double kLevelTol = 1e-12;

// Weighted median of ratio[j] under weights w[j]; minimizes sum_j w_j |ratio_j - c|.
double weighted_median(std::vector<std::pair<double, double>> ratio_weight) {
  std::sort(ratio_weight.begin(), ratio_weight.end());
  double total = 0.0;
  for (const auto& rw : ratio_weight) total += rw.second;
  double acc = 0.0;
  for (const auto& [ratio, w] : ratio_weight) {
    acc += w;
    if (acc >= 0.5 * total) return ratio;
  }
  return ratio_weight.back().first;
}

}  // namespace

BlockTransition block_transition(const BlockModelSpec& spec) {
  const std::size_t k = spec.block_sizes.size();
  if (k < 2) throw Error(ErrorKind::Argument, "block model needs K >= 2");
  const auto& b = spec.connection;
  if (static_cast<std::size_t>(b.rows()) != k || static_cast<std::size_t>(b.cols()) != k)
    throw Error(ErrorKind::Dimension, "connection matrix must be K x K");
  if ((b - b.transpose()).cwiseAbs().maxCoeff() > 1e-14)
    throw Error(ErrorKind::Domain, "connection matrix must be symmetric");
  if (b.minCoeff() < 0.0) throw Error(ErrorKind::Domain, "connection entries must be nonnegative");

  const auto kk = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd expected_adj(kk, kk);
  for (Eigen::Index u = 0; u < kk; ++u)
    for (Eigen::Index v = 0; v < kk; ++v)
      expected_adj(u, v) = static_cast<double>(spec.block_sizes[static_cast<std::size_t>(v)]) * b(u, v);

  BlockTransition out;
  out.kernel.resize(kk, kk);
  out.pi.resize(k);
  double total = 0.0;
  for (Eigen::Index u = 0; u < kk; ++u) {
    const double deg = expected_adj.row(u).sum();
    if (!(deg > 0.0)) throw Error(ErrorKind::Degenerate, "block " + std::to_string(u) + " has zero expected degree");
    out.kernel.row(u) = expected_adj.row(u) / deg;
    out.pi[static_cast<std::size_t>(u)] = static_cast<double>(spec.block_sizes[static_cast<std::size_t>(u)]) * deg;
    total += out.pi[static_cast<std::size_t>(u)];
  }
  for (double& p : out.pi) p /= total;
  out.lambda2 = spectral_decomposition(out.kernel, out.pi).lambda2();
  return out;
}

Eigen::MatrixXd two_block_kernel(double p) {
  Eigen::MatrixXd k(2, 2);
  k << p, 1.0 - p, 1.0 - p, p;
  return k;
}

Eigen::MatrixXd symmetric_block_kernel(std::size_t k, double p) {
  if (k < 1) throw Error(ErrorKind::Argument, "K must be >= 1");
  const auto n = static_cast<Eigen::Index>(2 * k);
  const double off = (1.0 - p) / static_cast<double>(2 * k - 1);
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(n, n, off);
  out.diagonal().setConstant(p);
  return out;
}

C2PrimeCheck check_c2prime(const Eigen::MatrixXd& kernel, std::span<const double> pi) {
  const auto n = kernel.rows();
  if (kernel.cols() != n || static_cast<std::size_t>(n) != pi.size())
    throw Error(ErrorKind::Dimension, "kernel and pi sizes disagree");
  double drift = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    double col = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) col += pi[static_cast<std::size_t>(i)] * kernel(i, j);
    drift += std::abs(col - pi[static_cast<std::size_t>(j)]);
  }
  if (drift > 1e-8) throw Error(ErrorKind::Consistency, "pi is not stationary for the kernel");

  C2PrimeCheck out;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<std::pair<double, double>> rw;
    rw.reserve(static_cast<std::size_t>(n));
    double row_dist = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double pj = pi[static_cast<std::size_t>(j)];
      rw.emplace_back(kernel(i, j) / pj, pj);
      row_dist += std::abs(kernel(i, j) - pj);
    }
    const double c = weighted_median(std::move(rw));
    double value = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      value += std::abs(kernel(i, j) - c * pi[static_cast<std::size_t>(j)]);
    out.gamma = std::max(out.gamma, value);
    out.row_distance = std::max(out.row_distance, row_dist);
  }
  out.pass = out.gamma < 1.0 / std::sqrt(2.0);
  return out;
}

bool check_c1_sufficient(const Eigen::MatrixXd& block_kernel, std::span<const double> levels) {
  const auto k = block_kernel.rows();
  if (block_kernel.cols() != k || static_cast<std::size_t>(k) != levels.size())
    throw Error(ErrorKind::Dimension, "kernel and level vector sizes disagree");

  // Distinct levels, merged within tolerance.
  std::vector<double> distinct;
  for (double v : levels)
    if (std::none_of(distinct.begin(), distinct.end(), [&](double d) { return std::abs(d - v) <= kLevelTol; }))
      distinct.push_back(v);
  auto level_index = [&](double v) -> std::ptrdiff_t {
    for (std::size_t i = 0; i < distinct.size(); ++i)
      if (std::abs(distinct[i] - v) <= kLevelTol) return static_cast<std::ptrdiff_t>(i);
    return -1;
  };
  for (double v : distinct)
    if (level_index(-v) < 0) return false;

  // Level kernel p(u, .), which must not depend on which block carries level u.
  const std::size_t L = distinct.size();
  std::vector<std::vector<double>> level_kernel(L);
  for (Eigen::Index b = 0; b < k; ++b) {
    std::vector<double> row(L, 0.0);
    for (Eigen::Index c = 0; c < k; ++c)
      row[static_cast<std::size_t>(level_index(levels[static_cast<std::size_t>(c)]))] += block_kernel(b, c);
    auto& slot = level_kernel[static_cast<std::size_t>(level_index(levels[static_cast<std::size_t>(b)]))];
    if (slot.empty()) {
      slot = std::move(row);
    } else {
      for (std::size_t v = 0; v < L; ++v)
        if (std::abs(slot[v] - row[v]) > kLevelTol) return false;
    }
  }
  for (std::size_t u = 0; u < L; ++u) {
    const auto nu = static_cast<std::size_t>(level_index(-distinct[u]));
    for (std::size_t v = 0; v < L; ++v) {
      const auto nv = static_cast<std::size_t>(level_index(-distinct[v]));
      if (std::abs(level_kernel[u][v] - level_kernel[nu][nv]) > kLevelTol) return false;
    }
  }
  return true;
}

bool check_c1_sufficient(const Graph& g, std::span<const int> block, std::span<const double> y) {
  if (block.size() != g.size() || y.size() != g.size())
    throw Error(ErrorKind::Dimension, "block labels and feature must cover every node");
  const int k = *std::max_element(block.begin(), block.end()) + 1;
  std::vector<double> levels(static_cast<std::size_t>(k), std::nan(""));
  for (std::size_t i = 0; i < g.size(); ++i) {
    double& level = levels[static_cast<std::size_t>(block[i])];
    if (std::isnan(level)) level = y[i];
    else if (std::abs(level - y[i]) > kLevelTol)
      throw Error(ErrorKind::NotApplicable, "feature is not constant within block " + std::to_string(block[i]));
  }
  // Each node acts as its own "block" carrying level y_i; the level kernel
  // must then agree across all nodes that share a level.
  return check_c1_sufficient(g.transition_matrix(), y);
}

}  // namespace rdslab
