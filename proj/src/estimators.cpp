#include "rdslab/estimators.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <json.hpp>

#include "rdslab/errors.hpp"

namespace rdslab {

namespace {

void require_nonempty(std::span<const double> v, const char* what) {
  if (v.empty()) throw Error(ErrorKind::Argument, std::string(what) + ": empty sample");
}

void require_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorKind::Dimension, "observation vectors differ in length");
}

double inverse_degree(double d) {
  if (!(d > 0.0)) throw Error(ErrorKind::Domain, "degree must be positive");
  return 1.0 / d;
}

}  // namespace

double sample_mean(std::span<const double> y) {
  require_nonempty(y, "sample_mean");
  return std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
}

double ipw_estimate(std::span<const double> y, std::span<const double> pi_at_samples, std::size_t population) {
  require_nonempty(y, "ipw_estimate");
  require_same_size(y.size(), pi_at_samples.size());
  if (population == 0) throw Error(ErrorKind::Argument, "population size must be positive");
  double sum = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (!(pi_at_samples[k] > 0.0)) throw Error(ErrorKind::Domain, "stationary probability must be positive");
    sum += y[k] / (static_cast<double>(population) * pi_at_samples[k]);
  }
  return sum / static_cast<double>(y.size());
}

double harmonic_mean_degree(std::span<const double> deg) {
  require_nonempty(deg, "harmonic_mean_degree");
  double s = 0.0;
  for (double d : deg) s += inverse_degree(d);
  return static_cast<double>(deg.size()) / s;
}

std::vector<double> vh_weights(std::span<const double> deg) {
  require_nonempty(deg, "vh_weights");
  std::vector<double> w(deg.size());
  double s = 0.0;
  for (std::size_t k = 0; k < deg.size(); ++k) s += (w[k] = inverse_degree(deg[k]));
  for (double& x : w) x /= s;
  return w;
}

double vh_estimate(std::span<const double> y, std::span<const double> deg) {
  require_same_size(y.size(), deg.size());
  const std::vector<double> w = vh_weights(deg);
  double mu = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) mu += w[k] * y[k];
  return mu;
}

std::vector<double> bias_feature(std::span<const double> y, std::span<const double> deg, double dbar) {
  require_same_size(y.size(), deg.size());
  std::vector<double> out(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double factor = 1.0 - dbar * inverse_degree(deg[k]);
    // dbar / deg within rounding of 1 means deg_k equals dbar.
    out[k] = std::abs(factor) <= kUnitRatioTol ? 0.0 : y[k] * factor;
  }
  return out;
}

double bias_statistic(std::span<const double> y, std::span<const double> deg) {
  return sample_mean(bias_feature(y, deg, harmonic_mean_degree(deg)));
}

double critical_value(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::Argument, "alpha must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal(), 1.0 - alpha / 2.0);
}

BiasTest bias_test(double bias_hat, double var_of_mean, double alpha) {
  if (!(var_of_mean >= 0.0)) throw Error(ErrorKind::Argument, "variance estimate must be nonnegative");
  const double crit = critical_value(alpha);
  BiasTest t;
  if (var_of_mean == 0.0) {
    if (bias_hat != 0.0) {
      t.z = std::copysign(std::numeric_limits<double>::infinity(), bias_hat);
      t.reject = true;
      t.degenerate = true;
    }
    return t;
  }
  t.z = bias_hat / std::sqrt(var_of_mean);
  t.reject = std::abs(t.z) > crit;
  return t;
}

double bias_adjusted(double mu_hat, double mu_weighted, bool reject) noexcept {
  return reject ? mu_weighted : mu_hat;
}

namespace {

WaveStatistic wave_sums(const WalkSample& s, std::span<const double> y, double center, unsigned m) {
  const ReferralTree& t = *s.tree;
  if (t.artificial_root() || !t.is_m_tree(m))
    throw Error(ErrorKind::Shape, "wave statistic needs a complete m-tree with m = " + std::to_string(m));
  const unsigned h = t.height();
  WaveStatistic w;
  w.y_wave.assign(h, 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const unsigned wave = t.wave(static_cast<TreeIndex>(i));
    if (wave == 0) continue;
    const NodeId v = s.assignment[i];
    if (v >= y.size()) throw Error(ErrorKind::Data, "feature missing for sampled node");
    w.y_wave[wave - 1] += y[v] - center;
  }
  double total = 0.0;
  for (unsigned i = 1; i <= h; ++i) {
    w.y_wave[i - 1] /= std::pow(static_cast<double>(m), 0.5 * i);
    total += w.y_wave[i - 1];
  }
  w.t = h > 0 ? total / std::sqrt(static_cast<double>(h)) : 0.0;
  return w;
}

}  // namespace

WaveStatistic wave_statistic(const WalkSample& s, std::span<const double> y, std::span<const double> pi,
                             unsigned m) {
  return wave_sums(s, y, pi_mean(y, pi), m);
}

WaveStatistic wave_statistic(const WalkSample& s, std::span<const double> y, unsigned m) {
  std::vector<double> yo(s.observed()), deg(s.deg_obs);
  for (std::size_t k = 0; k < yo.size(); ++k) {
    const NodeId v = s.assignment[k + s.first_observed()];
    if (v >= y.size()) throw Error(ErrorKind::Data, "feature missing for sampled node");
    yo[k] = y[v];
  }
  WaveStatistic w = wave_sums(s, y, vh_estimate(yo, deg), m);
  w.approximate = true;
  return w;
}

double theorem1_sigma0(const Spectrum& spec, std::span<const double> y, unsigned m) {
  if (m < 1) throw Error(ErrorKind::Argument, "m must be at least 1");
  const double l2 = spec.lambda2();
  const double sm = std::sqrt(static_cast<double>(m));
  if (static_cast<double>(m) * l2 * l2 >= 1.0 || 1.0 - std::abs(l2) < 1e-10)
    throw Error(ErrorKind::Threshold, "need m < lambda2^-2 (m = " + std::to_string(m) +
                                          ", lambda2 = " + std::to_string(l2) + ")");
  const std::vector<double> c = spec.coefficients(y);
  double sigma = 0.0;
  for (std::size_t l = 1; l < spec.size(); ++l) {
    const double lam = spec.eigenvalues[l];
    const double denom = sm * lam - 1.0;
    sigma += c[l] * c[l] * (1.0 - lam * lam) / (denom * denom);
  }
  return sigma;
}

EstimateReport make_estimate_report(std::span<const double> y, std::span<const double> deg, double sigma_hat_sq,
                                    double alpha, std::optional<std::span<const double>> pi_at_samples,
                                    std::size_t population, WeightedArm arm) {
  EstimateReport r;
  r.n = y.size();
  r.mu_hat = sample_mean(y);
  r.mu_vh = vh_estimate(y, deg);
  r.dbar_hat = harmonic_mean_degree(deg);
  r.bias_hat = bias_statistic(y, deg);
  if (pi_at_samples) r.mu_ipw = ipw_estimate(y, *pi_at_samples, population);
  r.sigma_hat_sq = sigma_hat_sq;
  r.alpha = alpha;
  const BiasTest t = bias_test(r.bias_hat, sigma_hat_sq, alpha);
  r.z = t.z;
  r.reject = t.reject;
  r.degenerate = t.degenerate;
  if (arm == WeightedArm::Auto) arm = r.mu_ipw ? WeightedArm::IPW : WeightedArm::VH;
  if (arm == WeightedArm::IPW && !r.mu_ipw)
    throw Error(ErrorKind::Argument, "IPW arm requested without stationary probabilities");
  r.arm = arm;
  r.mu_ba = bias_adjusted(r.mu_hat, arm == WeightedArm::IPW ? *r.mu_ipw : r.mu_vh, r.reject);
  return r;
}

std::string to_json(const EstimateReport& r) {
  auto number = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
  };
  nlohmann::json j;
  j["n"] = r.n;
  j["mu_hat"] = r.mu_hat;
  j["mu_ipw"] = r.mu_ipw ? nlohmann::json(*r.mu_ipw) : nlohmann::json(nullptr);
  j["mu_vh"] = r.mu_vh;
  j["dbar_hat"] = r.dbar_hat;
  j["bias_hat"] = r.bias_hat;
  j["sigma_hat_sq"] = r.sigma_hat_sq;
  j["z"] = number(r.z);
  j["reject"] = r.reject;
  j["mu_ba"] = r.mu_ba;
  j["convention"] = "var_of_mean";
  j["alpha"] = r.alpha;
  j["z_critical"] = critical_value(r.alpha);
  j["z_critical_rounded"] = 1.96;
  j["degenerate"] = r.degenerate;
  j["weighted_arm"] = r.arm == WeightedArm::IPW ? "ipw" : "vh";
  return j.dump(2);
}

}  // namespace rdslab
