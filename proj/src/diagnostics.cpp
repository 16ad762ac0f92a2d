#include "rdslab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "rdslab/errors.hpp"

namespace rdslab {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::vector<double> plotting_quantiles(std::size_t r) {
  const boost::math::normal normal;
  std::vector<double> q(r);
  for (std::size_t i = 0; i < r; ++i)
    q[i] = boost::math::quantile(normal, (static_cast<double>(i) + 0.5) / static_cast<double>(r));
  return q;
}

std::vector<double> standardize(std::span<const double> values) {
  if (values.size() < 2) throw Error(ErrorKind::Argument, "need at least two values to standardize");
  const double mu = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mu) * (v - mu);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  if (!(sd > 0.0)) throw Error(ErrorKind::Degenerate, "constant values cannot be standardized");
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [&](double v) { return (v - mu) / sd; });
  return out;
}

NormalityDiagnostics normality_diagnostics(std::span<const double> values) {
  const std::size_t r = values.size();
  if (r < kMinDiagnosticSample) throw Error(ErrorKind::Argument, "normality diagnostics need at least 20 values");
  const double mu = mean_of(values);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - mu;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double rd = static_cast<double>(r);
  m2 /= rd;
  m3 /= rd;
  m4 /= rd;
  if (!(m2 > 0.0)) throw Error(ErrorKind::Degenerate, "constant input has no normality diagnostics");

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::vector<double> q = plotting_quantiles(r);
  const double qm = mean_of(q);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    const double a = sorted[i] - mu, b = q[i] - qm;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }

  NormalityDiagnostics d;
  d.qq_correlation = sxy / std::sqrt(sxx * syy);
  d.skewness = m3 / std::pow(m2, 1.5);
  d.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  return d;
}

}  // namespace rdslab
