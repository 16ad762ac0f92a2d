#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rdslab {

struct NormalityDiagnostics {
  double qq_correlation = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

inline constexpr std::size_t kMinDiagnosticSample = 20;

/// Pearson correlation of the sorted values against standard normal quantiles
/// at (i - 0.5) / R, plus moment skewness and excess kurtosis.
NormalityDiagnostics normality_diagnostics(std::span<const double> values);

/// (x - mean) / sd with the n - 1 standard deviation.
std::vector<double> standardize(std::span<const double> values);

/// Phi^{-1}((i - 0.5) / r) for i = 1..r.
std::vector<double> plotting_quantiles(std::size_t r);

}  // namespace rdslab
