#include "rdslab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rdslab/errors.hpp"

namespace rdslab {
namespace {

std::vector<std::size_t> modulus_order(const Eigen::VectorXd& values) {
  std::vector<std::size_t> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(values(static_cast<Eigen::Index>(a)));
    const double mb = std::abs(values(static_cast<Eigen::Index>(b)));
    if (std::abs(ma - mb) > 1e-12) return ma > mb;
    return values(static_cast<Eigen::Index>(a)) > values(static_cast<Eigen::Index>(b));
  });
  return order;
}

Spectrum from_symmetric(const Eigen::MatrixXd& sym, std::span<const double> pi) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::Numerical, "symmetric eigensolver did not converge");

  const auto n = sym.rows();
  const auto order = modulus_order(solver.eigenvalues());
  Spectrum s;
  s.pi.assign(pi.begin(), pi.end());
  s.eigenvalues.resize(static_cast<std::size_t>(n));
  s.eigenfunctions.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto src = static_cast<Eigen::Index>(order[static_cast<std::size_t>(k)]);
    s.eigenvalues[static_cast<std::size_t>(k)] = solver.eigenvalues()(src);
    Eigen::VectorXd f = solver.eigenvectors().col(src);
    for (Eigen::Index i = 0; i < n; ++i) f(i) /= std::sqrt(pi[static_cast<std::size_t>(i)]);
    double norm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) norm += f(i) * f(i) * pi[static_cast<std::size_t>(i)];
    f /= std::sqrt(norm);
    const double scale = f.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(f(i)) > 1e-9 * scale) {
        if (f(i) < 0) f = -f;
        break;
      }
    }
    s.eigenfunctions.col(k) = f;
  }
  if (n > 0) {
    s.eigenvalues[0] = 1.0;
    s.eigenfunctions.col(0).setOnes();
  }
  s.lambda_min = n > 0 ? *std::min_element(s.eigenvalues.begin(), s.eigenvalues.end()) : 0.0;
  return s;
}

Eigen::MatrixXd symmetrized(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  const auto deg = g.degrees();
  for (NodeId i = 0; i < g.size(); ++i) {
    const auto nb = g.neighbors(i);
    const auto wt = g.neighbor_weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k) s(i, nb[k]) = wt[k] / std::sqrt(deg[i] * deg[nb[k]]);
  }
  return s;
}

}  // namespace

std::vector<double> Spectrum::coefficients(std::span<const double> y) const {
  std::vector<double> c(size());
  for (std::size_t l = 0; l < size(); ++l) c[l] = pi_inner(y, f(l), pi);
  return c;
}

std::vector<double> Spectrum::return_probabilities(unsigned t) const {
  const std::size_t n = size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 1.0;
    for (std::size_t l = 1; l < n; ++l) {
      const double fl = eigenfunctions(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l));
      acc += std::pow(eigenvalues[l], static_cast<double>(t)) * fl * fl;
    }
    out[i] = pi[i] * acc;
  }
  return out;
}

Spectrum spectral_decomposition(const Graph& g, std::size_t dense_limit) {
  if (g.size() > dense_limit)
    throw Error(ErrorKind::Capacity, "graph has " + std::to_string(g.size()) +
                                         " nodes, above the dense limit " + std::to_string(dense_limit));
  return from_symmetric(symmetrized(g), g.pi());
}

Spectrum spectral_decomposition(const Eigen::MatrixXd& kernel, std::span<const double> pi) {
  const auto n = kernel.rows();
  if (kernel.cols() != n || static_cast<std::size_t>(n) != pi.size())
    throw Error(ErrorKind::Dimension, "kernel and pi sizes disagree");
  Eigen::MatrixXd sym(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double pi_i = pi[static_cast<std::size_t>(i)], pi_j = pi[static_cast<std::size_t>(j)];
      if (std::abs(pi_i * kernel(i, j) - pi_j * kernel(j, i)) > 1e-10)
        throw Error(ErrorKind::Consistency, "kernel is not reversible with respect to pi");
      sym(i, j) = std::sqrt(pi_i / pi_j) * kernel(i, j);
    }
  sym = 0.5 * (sym + sym.transpose());
  return from_symmetric(sym, pi);
}

std::vector<double> walk_eigenvalues(const Graph& g, std::size_t dense_limit) {
  if (g.size() > dense_limit)
    throw Error(ErrorKind::Capacity, "graph above the dense limit");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetrized(g), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::Numerical, "symmetric eigensolver did not converge");
  const auto order = modulus_order(solver.eigenvalues());
  std::vector<double> out;
  out.reserve(order.size());
  for (auto k : order) out.push_back(solver.eigenvalues()(static_cast<Eigen::Index>(k)));
  if (!out.empty()) out[0] = 1.0;
  return out;
}

double pi_inner(std::span<const double> y, std::span<const double> f, std::span<const double> pi) {
  if (y.size() != f.size() || y.size() != pi.size())
    throw Error(ErrorKind::Dimension, "pi_inner: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += y[i] * f[i] * pi[i];
  return acc;
}

double pi_mean(std::span<const double> y, std::span<const double> pi) {
  if (y.size() != pi.size()) throw Error(ErrorKind::Dimension, "pi_mean: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += y[i] * pi[i];
  return acc;
}

double pi_variance(std::span<const double> y, std::span<const double> pi) {
  const double mu = pi_mean(y, pi);
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += (y[i] - mu) * (y[i] - mu) * pi[i];
  return acc;
}

}  // namespace rdslab
