#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rdslab/graph.hpp"
#include "rdslab/spectrum.hpp"
#include "rdslab/tree.hpp"
#include "rdslab/walk.hpp"

namespace rdslab {

/// cov(y(X_sigma), y(X_tau)) for tree nodes at distance d:
/// sum_{l>=2} lambda_l^d <y, f_l>_pi^2.
double exact_pair_covariance(const Spectrum& spec, std::span<const double> y, unsigned d);

struct VarianceBreakdown {
  struct Term {
    double lambda;
    double weight_sq;  // <y, f_l>_pi^2
    double g_of_lambda;
    double term;  // weight_sq * g_of_lambda
  };
  std::vector<Term> terms;  // l >= 2
  double sigma_sq_exact = 0.0;
  double var_pi = 0.0;
  double r = 0.0;  // sum weight_sq * lambda / var_pi
  double jensen_lower = 0.0;
  bool convexity_ok = false;  // G convex on [lambda_min, 1]
};

/// Exact variance of the sample mean of y under the tree walk:
/// sum_{l>=2} <y, f_l>^2 G(lambda_l).
VarianceBreakdown exact_mean_variance(const DistancePGF& pgf, const Spectrum& spec, std::span<const double> y);

void write_breakdown_csv(std::ostream& out, const VarianceBreakdown& b);
std::string breakdown_summary_json(const VarianceBreakdown& b);

struct PluginVariance {
  double var_hat = 0.0;
  double cov_hat = 0.0;
  double r_hat = 0.0;
  double sigma_hat_sq = 0.0;  // G(R_hat) var_hat, an estimate of Var(sample mean)
  bool degenerate = false;    // constant observations: moments, r_hat and sigma_hat_sq all 0
};

/// Plug-in variance from one sample. Both moments center on the VH estimate;
/// var_hat divides by n and cov_hat by the number of observed parent-child
/// pairs; pairs touching an artificial root are skipped.
PluginVariance plugin_variance(const WalkSample& s, std::span<const double> y_obs, const DistancePGF& pgf);

enum class Regime { Bounded, Linear, Exponential };
const char* to_string(Regime r) noexcept;

struct WaveVariance {
  double value = 0.0;
  Regime regime = Regime::Bounded;
};

/// Exact var(Y_h) for the m-tree: sum_l <y,f_l>^2 (1 + sum_{k=1}^h m^{k-1} (m-1) lambda_l^{2k}),
/// tagged by m lambda_2^2 against 1.
WaveVariance lemma3_wave_variance(const Spectrum& spec, std::span<const double> y, unsigned m, unsigned h);

/// Exact finite-h variance of T_h = h^{-1/2} sum_{i=1}^h Y_i on the m-tree
/// from the wave-to-wave pair counts.
double wave_statistic_variance(const Spectrum& spec, std::span<const double> y, unsigned m, unsigned h);

struct VarianceComparison {
  double var_ipw = 0.0;
  double var_mean = 0.0;
  double vd = 0.0;  // var_ipw - var_mean
  double bound = 0.0;
};

/// var(pi) = (1/N) sum pi_i^2 - 1/N^2.
double pi_heterogeneity(std::span<const double> pi);

/// Closed forms for n independent pi-draws of a feature whose node values are
/// uncorrelated with mean mu1 and second moment mu2.
VarianceComparison iid_variance_comparison(std::span<const double> pi, std::size_t n, double mu1, double mu2);

/// Smallest and largest deg_i / N.
std::pair<double, double> degree_bounds(const Graph& g);

/// Closed forms for the tree walk of `pgf`'s tree on g with the same feature
/// model. Requires C1 N <= d_i <= C2 N for every node.
VarianceComparison tree_variance_comparison(const Graph& g, const Spectrum& spec, const DistancePGF& pgf, double mu1,
                                            double mu2, double c1, double c2);

}  // namespace rdslab
