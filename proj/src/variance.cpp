#include "rdslab/variance.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "rdslab/csv.hpp"
#include "rdslab/errors.hpp"
#include "rdslab/estimators.hpp"

namespace rdslab {

double exact_pair_covariance(const Spectrum& spec, std::span<const double> y, unsigned d) {
  const std::vector<double> c = spec.coefficients(y);
  double cov = 0.0;
  for (std::size_t l = 1; l < spec.size(); ++l) cov += std::pow(spec.eigenvalues[l], d) * c[l] * c[l];
  return cov;
}

VarianceBreakdown exact_mean_variance(const DistancePGF& pgf, const Spectrum& spec, std::span<const double> y) {
  const std::vector<double> c = spec.coefficients(y);
  VarianceBreakdown b;
  double first_moment = 0.0;
  for (std::size_t l = 1; l < spec.size(); ++l) {
    const double lam = spec.eigenvalues[l];
    const double w = c[l] * c[l];
    const double g = pgf(lam);
    b.terms.push_back({lam, w, g, w * g});
    b.sigma_sq_exact += w * g;
    b.var_pi += w;
    first_moment += w * lam;
  }
  b.r = b.var_pi > 0.0 ? first_moment / b.var_pi : 0.0;
  b.jensen_lower = pgf(b.r) * b.var_pi;
  b.convexity_ok = convexity_scan(pgf, spec.lambda_min).convex();
  return b;
}

void write_breakdown_csv(std::ostream& out, const VarianceBreakdown& b) {
  out << "lambda,weight_sq,G_of_lambda,term\n";
  for (const auto& t : b.terms)
    out << format_double(t.lambda) << ',' << format_double(t.weight_sq) << ',' << format_double(t.g_of_lambda)
        << ',' << format_double(t.term) << '\n';
}

std::string breakdown_summary_json(const VarianceBreakdown& b) {
  nlohmann::json j;
  j["sigma_sq_exact"] = b.sigma_sq_exact;
  j["R"] = b.r;
  j["jensen_lower"] = b.jensen_lower;
  j["convex"] = b.convexity_ok;
  j["var_pi"] = b.var_pi;
  j["convention"] = "var_of_mean";
  return j.dump(2);
}

PluginVariance plugin_variance(const WalkSample& s, std::span<const double> y_obs, const DistancePGF& pgf) {
  const std::size_t n = y_obs.size();
  if (n != s.observed()) throw Error(ErrorKind::Dimension, "feature vector does not match the sample");
  if (n < 2) throw Error(ErrorKind::Argument, "plug-in variance needs at least two observations");
  const double center = vh_estimate(y_obs, s.deg_obs);
  PluginVariance pv;
  for (double v : y_obs) pv.var_hat += (v - center) * (v - center);
  pv.var_hat /= static_cast<double>(n);

  const ReferralTree& t = *s.tree;
  const std::size_t first = s.first_observed();
  std::size_t pairs = 0;
  for (std::size_t i = first; i < t.size(); ++i) {
    const std::int64_t p = t.parent(static_cast<TreeIndex>(i));
    if (p == kNoParent || static_cast<std::size_t>(p) < first) continue;
    pv.cov_hat += (y_obs[i - first] - center) * (y_obs[static_cast<std::size_t>(p) - first] - center);
    ++pairs;
  }
  if (pairs == 0) throw Error(ErrorKind::Argument, "plug-in variance needs a parent-child pair");
  pv.cov_hat /= static_cast<double>(pairs);

  const auto [lo, hi] = std::minmax_element(y_obs.begin(), y_obs.end());
  if (*lo == *hi || pv.var_hat == 0.0) {
    pv.var_hat = 0.0;
    pv.cov_hat = 0.0;
    pv.degenerate = true;
    return pv;
  }
  pv.r_hat = pv.cov_hat / pv.var_hat;
  pv.sigma_hat_sq = pgf(pv.r_hat) * pv.var_hat;
  return pv;
}

const char* to_string(Regime r) noexcept {
  switch (r) {
    case Regime::Bounded: return "bounded";
    case Regime::Linear: return "linear";
    case Regime::Exponential: return "exponential";
  }
  return "unknown";
}

WaveVariance lemma3_wave_variance(const Spectrum& spec, std::span<const double> y, unsigned m, unsigned h) {
  if (m < 1) throw Error(ErrorKind::Argument, "m must be at least 1");
  const std::vector<double> c = spec.coefficients(y);
  const double md = static_cast<double>(m);
  WaveVariance wv;
  for (std::size_t l = 1; l < spec.size(); ++l) {
    const double lam2 = spec.eigenvalues[l] * spec.eigenvalues[l];
    double factor = 1.0;
    double power = lam2;  // m^{k-1} lambda^{2k}
    for (unsigned k = 1; k <= h; ++k) {
      factor += (md - 1.0) * power;
      power *= md * lam2;
    }
    wv.value += c[l] * c[l] * factor;
  }
  const double growth = md * spec.lambda2() * spec.lambda2();
  if (std::abs(growth - 1.0) <= 1e-12)
    wv.regime = Regime::Linear;
  else
    wv.regime = growth < 1.0 ? Regime::Bounded : Regime::Exponential;
  return wv;
}

double wave_statistic_variance(const Spectrum& spec, std::span<const double> y, unsigned m, unsigned h) {
  if (m < 1) throw Error(ErrorKind::Argument, "m must be at least 1");
  if (h < 1) throw Error(ErrorKind::Argument, "h must be at least 1");
  const std::vector<double> c = spec.coefficients(y);
  const double md = static_cast<double>(m);
  // Ordered pairs (sigma on wave i, tau on wave j), i <= j: m^j at distance
  // j - i through sigma's subtree and (m-1) m^{i+j-k-1} whose common ancestor
  // sits on wave k < i, at distance i + j - 2k.
  double total = 0.0;
  for (std::size_t l = 1; l < spec.size(); ++l) {
    const double lam = spec.eigenvalues[l];
    double sum = 0.0;
    for (unsigned i = 1; i <= h; ++i) {
      for (unsigned j = i; j <= h; ++j) {
        double cov = std::pow(md, j) * std::pow(lam, j - i);
        for (unsigned k = 0; k < i; ++k)
          cov += (md - 1.0) * std::pow(md, i + j - k - 1) * std::pow(lam, i + j - 2 * k);
        cov /= std::pow(md, 0.5 * (i + j));
        sum += (i == j ? 1.0 : 2.0) * cov;
      }
    }
    total += c[l] * c[l] * sum;
  }
  return total / static_cast<double>(h);
}

double pi_heterogeneity(std::span<const double> pi) {
  const double nd = static_cast<double>(pi.size());
  double sq = 0.0;
  for (double p : pi) sq += p * p;
  return sq / nd - 1.0 / (nd * nd);
}

namespace {

void check_moments(double mu1, double mu2) {
  if (mu2 < mu1 * mu1) throw Error(ErrorKind::Argument, "need mu2 >= mu1^2");
}

}  // namespace

VarianceComparison iid_variance_comparison(std::span<const double> pi, std::size_t n, double mu1, double mu2) {
  check_moments(mu1, mu2);
  if (n == 0 || pi.empty()) throw Error(ErrorKind::Argument, "need n >= 1 and a nonempty pi");
  const double nd = static_cast<double>(n);
  const double big = static_cast<double>(pi.size());
  double sum_sq = 0.0, inv = 0.0, c1 = 0.0;
  for (double p : pi) {
    if (!(p > 0.0)) throw Error(ErrorKind::Domain, "stationary probabilities must be positive");
    sum_sq += p * p;
    inv += 1.0 / (big * big * p);
    c1 = std::max(c1, big * p);
  }
  const double m1sq = mu1 * mu1;
  VarianceComparison v;
  v.var_mean = mu2 / nd - m1sq / nd + (nd - 1.0) / nd * (mu2 * sum_sq + m1sq * (1.0 - sum_sq) - m1sq);
  v.var_ipw = mu2 / nd * inv - m1sq / nd + (nd - 1.0) / nd * (mu2 / big + m1sq * (1.0 - 1.0 / big) - m1sq);
  v.vd = v.var_ipw - v.var_mean;
  v.bound = mu2 * big * (big / (nd * c1 * c1) - 1.0) * pi_heterogeneity(pi);
  return v;
}

std::pair<double, double> degree_bounds(const Graph& g) {
  const auto deg = g.degrees();
  const auto [lo, hi] = std::minmax_element(deg.begin(), deg.end());
  const double big = static_cast<double>(g.size());
  return {*lo / big, *hi / big};
}

VarianceComparison tree_variance_comparison(const Graph& g, const Spectrum& spec, const DistancePGF& pgf, double mu1,
                                            double mu2, double c1, double c2) {
  check_moments(mu1, mu2);
  const std::size_t big_n = g.size();
  if (spec.size() != big_n) throw Error(ErrorKind::Dimension, "spectrum does not match the graph");
  const double big = static_cast<double>(big_n);
  if (!(c1 > 0.0) || c2 < c1) throw Error(ErrorKind::Argument, "need 0 < C1 <= C2");
  for (double d : g.degrees())
    if (d < c1 * big * (1.0 - 1e-12) || d > c2 * big * (1.0 + 1e-12))
      throw Error(ErrorKind::Precondition, "degree bounds C1 N <= d_i <= C2 N violated");

  const auto pi = g.pi();
  const double nd = static_cast<double>(pgf.n());
  const double m1sq = mu1 * mu1;
  const double var_y = mu2 - m1sq;

  // (sum_i f_l(i))^2 for the mean-correction of the IPW cross terms.
  std::vector<double> f_sum_sq(spec.size(), 0.0);
  for (std::size_t l = 1; l < spec.size(); ++l) {
    double s = 0.0;
    for (double x : spec.f(l)) s += x;
    f_sum_sq[l] = s * s;
  }

  double inv = 0.0;
  for (double p : pi) inv += 1.0 / (big * big * p);

  double cross_mean = 0.0, cross_ipw = 0.0;
  const auto counts = pgf.counts();
  for (std::size_t d = 1; d < counts.size(); ++d) {
    if (counts[d] == 0) continue;
    const std::vector<double> ret = spec.return_probabilities(static_cast<unsigned>(d));
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < big_n; ++i) {
      a += pi[i] * ret[i];
      b += ret[i] / (big * big * pi[i]);
    }
    double s_excess = 0.0;  // S_d - N^2 with S_d = sum_ij p^d_ij / pi_j
    for (std::size_t l = 1; l < spec.size(); ++l)
      s_excess += std::pow(spec.eigenvalues[l], static_cast<double>(d)) * f_sum_sq[l];
    const double cd = static_cast<double>(counts[d]);
    cross_mean += cd * var_y * a;
    cross_ipw += cd * (var_y * b + m1sq * s_excess / (big * big));
  }

  VarianceComparison v;
  v.var_mean = mu2 / nd - m1sq / nd + cross_mean / (nd * nd);
  v.var_ipw = mu2 / nd * inv - m1sq / nd + cross_ipw / (nd * nd);
  v.vd = v.var_ipw - v.var_mean;
  v.bound = mu2 * (big * big * c1 * c1 / (nd * c2 * c2) * pi_heterogeneity(pi) - c2 / (big * c1 * c1));
  return v;
}

}  // namespace rdslab
