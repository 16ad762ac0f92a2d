#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdslab/spectrum.hpp"
#include "rdslab/walk.hpp"

namespace rdslab {

inline constexpr double kDefaultAlpha = 0.05;

double sample_mean(std::span<const double> y);

/// (1/n) sum_k y_k / (N pi_k).
double ipw_estimate(std::span<const double> y, std::span<const double> pi_at_samples, std::size_t population);

/// n / sum_k 1/deg_k.
double harmonic_mean_degree(std::span<const double> deg);

/// Hajek weights (1/deg_k) / sum_j (1/deg_j).
std::vector<double> vh_weights(std::span<const double> deg);

double vh_estimate(std::span<const double> y, std::span<const double> deg);

inline constexpr double kUnitRatioTol = 1e-12;

/// y_k (1 - dbar / deg_k), exactly 0 where |1 - dbar / deg_k| <= 1e-12.
std::vector<double> bias_feature(std::span<const double> y, std::span<const double> deg, double dbar);
/// Mean of y'_VH, algebraically mu_hat - mu_VH; exactly 0 when all degrees agree.
double bias_statistic(std::span<const double> y, std::span<const double> deg);

/// Two-sided normal critical value z_{1 - alpha/2}.
double critical_value(double alpha = kDefaultAlpha);

struct BiasTest {
  double z = 0.0;
  bool reject = false;
  bool degenerate = false;  // zero variance with nonzero bias: rejected without a finite z
};

/// z = bias_hat / sqrt(var_of_mean); reject iff |z| > z_{1 - alpha/2}.
BiasTest bias_test(double bias_hat, double var_of_mean, double alpha = kDefaultAlpha);

double bias_adjusted(double mu_hat, double mu_weighted, bool reject) noexcept;

struct WaveStatistic {
  std::vector<double> y_wave;  // Y_1..Y_h: wave sums scaled by m^{-i/2}
  double t = 0.0;              // (1/sqrt h) sum_i Y_i
  bool approximate = false;    // centered on the VH estimate instead of the exact mean
};

/// Wave sums of y - E_pi(y) on an m-tree sample.
WaveStatistic wave_statistic(const WalkSample& s, std::span<const double> y, std::span<const double> pi,
                             unsigned m);

/// Data-only variant: centers on the VH estimate from the sample itself.
WaveStatistic wave_statistic(const WalkSample& s, std::span<const double> y, unsigned m);

/// sum_{l>=2} <y,f_l>^2 (1 - lambda_l^2) / (sqrt(m) lambda_l - 1)^2 for y
/// centered under pi. Requires m lambda_2^2 < 1.
double theorem1_sigma0(const Spectrum& spec, std::span<const double> y, unsigned m);

enum class WeightedArm { Auto, VH, IPW };

struct EstimateReport {
  std::size_t n = 0;
  double mu_hat = 0.0;
  std::optional<double> mu_ipw;
  double mu_vh = 0.0;
  double dbar_hat = 0.0;
  double bias_hat = 0.0;
  double sigma_hat_sq = 0.0;  // variance of the mean of y'_VH
  double z = 0.0;
  bool reject = false;
  bool degenerate = false;
  double alpha = kDefaultAlpha;
  double mu_ba = 0.0;
  WeightedArm arm = WeightedArm::VH;  // arm actually used by mu_ba
};

/// Assembles every estimate and the bias test. With `pi_at_samples` given,
/// IPW is reported and Auto selects it as the weighted arm; otherwise VH.
EstimateReport make_estimate_report(std::span<const double> y, std::span<const double> deg, double sigma_hat_sq,
                                    double alpha = kDefaultAlpha,
                                    std::optional<std::span<const double>> pi_at_samples = std::nullopt,
                                    std::size_t population = 0, WeightedArm arm = WeightedArm::Auto);

std::string to_json(const EstimateReport& r);

}  // namespace rdslab
