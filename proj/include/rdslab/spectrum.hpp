#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rdslab/graph.hpp"

namespace rdslab {

inline constexpr std::size_t kDefaultDenseLimit = 10'000;

/// Eigen-decomposition of a reversible kernel. Eigenvalues are sorted by
/// modulus (ties: larger signed value first), so eigenvalues[0] == 1.
/// Column l of `eigenfunctions` is f_l, orthonormal under <a,b>_pi, with
/// f_0 the all-ones function and each other column's first nonzero entry
/// positive.
struct Spectrum {
  std::vector<double> eigenvalues;
  Eigen::MatrixXd eigenfunctions;
  std::vector<double> pi;
  double lambda_min = 0.0;  // smallest signed eigenvalue

  std::size_t size() const noexcept { return eigenvalues.size(); }
  /// Second eigenvalue by modulus (signed); 0 for a one-state chain.
  double lambda2() const noexcept { return eigenvalues.size() > 1 ? eigenvalues[1] : 0.0; }
  std::span<const double> f(std::size_t l) const noexcept {
    return {eigenfunctions.col(static_cast<Eigen::Index>(l)).data(), eigenvalues.size()};
  }
  /// <y, f_l>_pi for every l.
  std::vector<double> coefficients(std::span<const double> y) const;
  /// Return probabilities P^t_ii = pi_i + pi_i sum_{l>=2} lambda_l^t f_l(i)^2.
  std::vector<double> return_probabilities(unsigned t) const;
};

/// Dense decomposition through the symmetrized operator
/// S_ij = w_ij / sqrt(deg(i) deg(j)).
Spectrum spectral_decomposition(const Graph& g, std::size_t dense_limit = kDefaultDenseLimit);

/// Decomposition of an arbitrary reversible kernel with stationary law pi.
Spectrum spectral_decomposition(const Eigen::MatrixXd& kernel, std::span<const double> pi);

/// Eigenvalues only (same ordering); cheaper for realized-lambda2 reports.
std::vector<double> walk_eigenvalues(const Graph& g, std::size_t dense_limit = kDefaultDenseLimit);

/// <y, f>_pi = sum_i y(i) f(i) pi_i.
double pi_inner(std::span<const double> y, std::span<const double> f, std::span<const double> pi);

double pi_mean(std::span<const double> y, std::span<const double> pi);
double pi_variance(std::span<const double> y, std::span<const double> pi);

}  // namespace rdslab
