#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rdslab/graph.hpp"

namespace rdslab {

struct BlockModelSpec {
  std::vector<std::size_t> block_sizes;
  Eigen::MatrixXd connection;         // symmetric K x K, B_uv
  std::vector<double> block_features;  // optional y per block
};

struct BlockTransition {
  Eigen::MatrixXd kernel;  // E(D)^{-1} E(A) at block level
  std::vector<double> pi;  // stationary law over blocks
  double lambda2 = 0.0;    // second eigenvalue by modulus, signed
};

/// Block-level kernel with expected adjacency E(A)_uv = size_v * B_uv.
BlockTransition block_transition(const BlockModelSpec& spec);

/// [[p, 1-p], [1-p, p]].
Eigen::MatrixXd two_block_kernel(double p);

/// 2K-block kernel p(u,v) = p 1(u=v) + (1-p)/(2K-1) 1(u!=v).
Eigen::MatrixXd symmetric_block_kernel(std::size_t k, double p);

struct C2PrimeCheck {
  /// max_i min_c sum_j |P_ij - c pi_j|: the exact sup-norm operator norm of
  /// P on mean-zero functions.
  double gamma = 0.0;
  /// max_i sum_j |P_ij - pi_j|, the cruder row-distance quantity.
  double row_distance = 0.0;
  bool pass = false;  // gamma < 1/sqrt(2)
};

C2PrimeCheck check_c2prime(const Eigen::MatrixXd& kernel, std::span<const double> pi);

/// Sign-symmetry sufficient condition for vanishing odd moments: the level
/// set is closed under negation and the level-to-level kernel satisfies
/// p(u,v) = p(-u,-v). `levels[b]` is the feature value of block b.
bool check_c1_sufficient(const Eigen::MatrixXd& block_kernel, std::span<const double> levels);

/// Graph-level variant: y must be constant on each block (else NotApplicable).
bool check_c1_sufficient(const Graph& g, std::span<const int> block, std::span<const double> y);

}  // namespace rdslab
