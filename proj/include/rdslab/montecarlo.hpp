#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rdslab/diagnostics.hpp"
#include "rdslab/estimators.hpp"
#include "rdslab/surrogate.hpp"
#include "rdslab/tree.hpp"
#include "rdslab/walk.hpp"

namespace rdslab {

enum class TreeDesign { MTree, GaltonWatson };

struct ExperimentConfig {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::filesystem::path out_dir = "out";
  std::size_t replications = 1000;
  double alpha = kDefaultAlpha;

  // Q-Q study on two-block SBM graphs.
  std::size_t population = 2000;
  double density_sum = 0.01;  // p + r
  std::vector<double> lambda2_grid{0.5, 0.6, 0.8, 0.9};
  unsigned waves = 8;
  unsigned m = 2;
  std::vector<double> qq_offspring{0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  std::vector<TreeDesign> tree_designs{TreeDesign::MTree, TreeDesign::GaltonWatson};
  std::vector<Replacement> replacement_modes{Replacement::With, Replacement::Without};

  // Power and MSE sweeps on a population with named features.
  std::vector<std::size_t> sample_sizes{20, 50, 100, 200, 350, 500};
  std::vector<int> scenarios{1, 2, 3, 4};
  std::vector<double> walk_offspring{0.0, 0.9, 0.1};
  std::size_t pilot_replications = 1000;
  std::vector<std::string> features;  // empty: every feature of the population
  SurrogateParams surrogate;
  std::string edge_list;   // empty: synthetic surrogate
  std::string attributes;  // CSV with one column per feature

  // Convexity scan of G over Galton-Watson trees.
  std::size_t trees = 20;
  std::vector<double> pgf_offspring{0.1, 0.1, 0.3, 0.5};
  std::size_t node_cap = 5000;
  double z_min = -1.0;
  double z_step = 0.01;
  bool pgf_exact_cap = true;  // cut to node_cap nodes; false keeps the whole last wave
};

/// N = 5000 and R = 2000.
ExperimentConfig paper_scale(ExperimentConfig c);

/// Overrides fields from a JSON object; unknown keys and bad values raise
/// a config error.
void apply_json(ExperimentConfig& c, const std::string& json_text);

void validate(const ExperimentConfig& c);

std::string to_string(TreeDesign d, unsigned m);
std::string to_string(Replacement r);

struct QqSeries {
  std::size_t scenario = 0;
  double lambda2_target = 0.0;
  double lambda2_realized = 0.0;
  TreeDesign tree = TreeDesign::MTree;
  Replacement replacement = Replacement::With;
  std::string estimator;  // "mean" or "vh"
  std::vector<double> estimates;
  std::vector<double> standardized;
  NormalityDiagnostics diagnostics;
  double mean_sample_size = 0.0;
  std::size_t truncations = 0;
};

struct QqResult {
  unsigned m = 2;
  std::vector<QqSeries> series;
};

/// Every (lambda2, tree design, replacement mode) with the block-1 indicator
/// as the feature; one series per estimator.
QqResult run_qq(const ExperimentConfig& c);
void write_qq_csv(std::ostream& out, const QqResult& r);
void write_qq_summary_csv(std::ostream& out, const QqResult& r);

/// Population truth for a feature y: y'(i) = y(i) (1 - dbar / deg(i)).
struct FeatureTruth {
  double mu = 0.0;        // (1/N) sum y
  double bias = 0.0;      // E_pi(y')
  double var_prime = 0.0;  // var_pi(y')
  double cor_pi = 0.0;    // correlation of pi and y over nodes
};
FeatureTruth feature_truth(const Graph& g, std::span<const double> y);

/// Phi(-z + sqrt(n) |b| / s) + Phi(-z - sqrt(n) |b| / s).
double analytic_power(double bias, double var_prime, std::size_t n, double alpha);

struct PowerRow {
  std::string feature;
  int scenario = 0;
  std::size_t n = 0;
  double power = 0.0;
  double se = 0.0;
};

struct PowerResult {
  std::vector<PowerRow> rows;
};

PowerResult run_power(const ExperimentConfig& c, const PopulationData& pop);
void write_power_csv(std::ostream& out, const PowerResult& r);

struct MseRow {
  std::string feature;
  std::string estimator;  // "mean", "ipw", "ba"
  std::size_t n = 0;
  double mse = 0.0;
  double se = 0.0;
};

/// Paired squared-error differences at one sweep point.
struct MseContrast {
  std::string feature;
  std::size_t n = 0;
  double ba_minus_mean = 0.0;
  double se_ba_minus_mean = 0.0;
  double ba_minus_ipw = 0.0;
  double se_ba_minus_ipw = 0.0;
};

struct Crossover {
  std::string feature;
  std::optional<std::size_t> n;  // empty: beyond the sweep
  std::string label;             // n, or "> max n"
};

struct MseResult {
  std::vector<MseRow> rows;
  std::vector<MseContrast> contrasts;
  std::vector<Crossover> crossovers;
};

MseResult run_mse(const ExperimentConfig& c, const PopulationData& pop);
void write_mse_csv(std::ostream& out, const MseResult& r);
void write_crossover_csv(std::ostream& out, const MseResult& r);

struct PgfTree {
  std::size_t tree_id = 0;
  std::size_t nodes = 0;
  DistancePGF pgf;
  ConvexityScan scan;
};

struct PgfResult {
  std::vector<PgfTree> trees;
};

PgfResult run_pgf_scan(const ExperimentConfig& c);
void write_pgf_scan_csv(std::ostream& out, const PgfResult& r);

/// Surrogate network or edge list plus attribute file, per the config.
PopulationData load_population(const ExperimentConfig& c);

}  // namespace rdslab
