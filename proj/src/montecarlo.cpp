#include "rdslab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <json.hpp>

#include "rdslab/csv.hpp"
#include "rdslab/errors.hpp"
#include "rdslab/spectrum.hpp"
#include "rdslab/variance.hpp"

namespace rdslab {

namespace {

// Stream namespaces; every replicate stream is (seed, namespace + id, rep).
constexpr std::uint64_t kGraphStreams = 1u << 20;
constexpr std::uint64_t kQqStreams = 2u << 20;
constexpr std::uint64_t kPowerStreams = 3u << 20;
constexpr std::uint64_t kPilotStreams = 4u << 20;
constexpr std::uint64_t kMseStreams = 5u << 20;
constexpr std::uint64_t kPgfStreams = 6u << 20;
constexpr std::uint64_t kSurrogateStreams = 7u << 20;

struct Moments {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
};

Moments moments(std::span<const double> v) {
  Moments m;
  const double n = static_cast<double>(v.size());
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return m;
}

double sample_variance(std::span<const double> v) {
  const double mu = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return ss / static_cast<double>(v.size() - 1);
}

std::vector<std::size_t> feature_indices(const ExperimentConfig& c, const PopulationData& pop) {
  std::vector<std::size_t> idx;
  if (c.features.empty()) {
    idx.resize(pop.names.size());
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
  }
  for (const auto& f : c.features) {
    const auto it = std::find(pop.names.begin(), pop.names.end(), f);
    if (it == pop.names.end()) throw Error(ErrorKind::Config, "unknown feature '" + f + "'");
    idx.push_back(static_cast<std::size_t>(it - pop.names.begin()));
  }
  return idx;
}

/// First n nodes, in breadth-first order, of a Galton-Watson tree grown until
/// a completed wave reaches n.
ReferralTree walk_tree(const OffspringLaw& law, std::size_t n, Rng& rng) {
  return galton_watson_capped(law, n, rng).prefix(n);
}

struct WalkDraw {
  std::vector<double> y;
  std::vector<double> deg;
  std::vector<double> pi;
  WalkSample sample;
};

WalkDraw draw_walk(const Graph& g, std::span<const double> y, const OffspringLaw& law, std::size_t n, Rng& rng) {
  WalkDraw d;
  d.sample = tp_walk(g, std::make_shared<const ReferralTree>(walk_tree(law, n, rng)), RootSpec{}, rng);
  d.y = observe_feature(d.sample, y);
  d.deg = d.sample.deg_obs;
  for (NodeId v : observed_nodes(d.sample)) d.pi.push_back(g.pi()[v]);
  return d;
}

}  // namespace

ExperimentConfig paper_scale(ExperimentConfig c) {
  c.population = 5000;
  c.replications = 2000;
  return c;
}

std::string to_string(TreeDesign d, unsigned m) {
  return d == TreeDesign::MTree ? std::to_string(m) + "-tree" : "gw";
}

std::string to_string(Replacement r) { return r == Replacement::With ? "with" : "without"; }

void apply_json(ExperimentConfig& c, const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::Config, "config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "threads") c.threads = v.get<unsigned>();
      else if (key == "out") c.out_dir = v.get<std::string>();
      else if (key == "replications") c.replications = v.get<std::size_t>();
      else if (key == "alpha") c.alpha = v.get<double>();
      else if (key == "population" || key == "n") c.population = v.get<std::size_t>();
      else if (key == "density_sum") c.density_sum = v.get<double>();
      else if (key == "lambda2") c.lambda2_grid = v.get<std::vector<double>>();
      else if (key == "waves") c.waves = v.get<unsigned>();
      else if (key == "m") c.m = v.get<unsigned>();
      else if (key == "qq_offspring") c.qq_offspring = v.get<std::vector<double>>();
      else if (key == "tree_designs") {
        c.tree_designs.clear();
        for (const auto& s : v.get<std::vector<std::string>>()) {
          if (s == "m-tree") c.tree_designs.push_back(TreeDesign::MTree);
          else if (s == "gw") c.tree_designs.push_back(TreeDesign::GaltonWatson);
          else throw Error(ErrorKind::Config, "tree design must be 'm-tree' or 'gw'");
        }
      } else if (key == "replacement") {
        c.replacement_modes.clear();
        for (const auto& s : v.get<std::vector<std::string>>()) {
          if (s == "with") c.replacement_modes.push_back(Replacement::With);
          else if (s == "without") c.replacement_modes.push_back(Replacement::Without);
          else throw Error(ErrorKind::Config, "replacement must be 'with' or 'without'");
        }
      } else if (key == "sample_sizes") c.sample_sizes = v.get<std::vector<std::size_t>>();
      else if (key == "scenarios") c.scenarios = v.get<std::vector<int>>();
      else if (key == "walk_offspring") c.walk_offspring = v.get<std::vector<double>>();
      else if (key == "pilot_replications") c.pilot_replications = v.get<std::size_t>();
      else if (key == "features") c.features = v.get<std::vector<std::string>>();
      else if (key == "edge_list") c.edge_list = v.get<std::string>();
      else if (key == "attributes") c.attributes = v.get<std::string>();
      else if (key == "trees") c.trees = v.get<std::size_t>();
      else if (key == "pgf_offspring") c.pgf_offspring = v.get<std::vector<double>>();
      else if (key == "node_cap") c.node_cap = v.get<std::size_t>();
      else if (key == "z_min") c.z_min = v.get<double>();
      else if (key == "z_step") c.z_step = v.get<double>();
      else if (key == "pgf_exact_cap") c.pgf_exact_cap = v.get<bool>();
      else if (key == "surrogate") {
        for (const auto& [sk, sv] : v.items()) {
          if (sk == "n") c.surrogate.n = sv.get<std::size_t>();
          else if (sk == "max_nominations") c.surrogate.max_nominations = sv.get<unsigned>();
          else if (sk == "nominate_prob") c.surrogate.nominate_prob = sv.get<double>();
          else if (sk == "cross_school") c.surrogate.cross_school = sv.get<double>();
          else throw Error(ErrorKind::Config, "unknown surrogate key '" + sk + "'");
        }
      } else {
        throw Error(ErrorKind::Config, "unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("bad config value: ") + e.what());
  }
  validate(c);
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::Config, what); };
  if (c.replications < 1) fail("replications must be at least 1");
  if (c.waves < 1) fail("waves must be at least 1");
  if (c.m < 1) fail("m must be at least 1");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) fail("alpha must lie in (0, 1)");
  for (int s : c.scenarios)
    if (s < 1 || s > 4) fail("unknown power scenario " + std::to_string(s));
  for (std::size_t n : c.sample_sizes)
    if (n < 2) fail("sample sizes must be at least 2");
  if (c.pilot_replications < 2) fail("pilot_replications must be at least 2");
  if (!(c.z_step > 0.0)) fail("z_step must be positive");
  if (c.node_cap < 1) fail("node_cap must be positive");
}

// ---------------------------------------------------------------- Q-Q study

QqResult run_qq(const ExperimentConfig& c) {
  validate(c);
  const OffspringLaw gw_law(c.qq_offspring);
  QqResult result;
  result.m = c.m;
  std::size_t scenario = 0;
  for (std::size_t k = 0; k < c.lambda2_grid.size(); ++k) {
    const double target = c.lambda2_grid[k];
    const auto [p, r] = sbm_parameters_for(target, c.density_sum);
    Rng graph_rng = make_stream(c.seed, kGraphStreams + k, 0);
    const SbmGraph sbm = sbm_sample(c.population, p, r, graph_rng);
    const Graph& g = sbm.graph;
    const double realized = walk_eigenvalues(g)[1];
    std::vector<double> y(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) y[i] = sbm.block[i] == 1 ? 1.0 : 0.0;

    for (TreeDesign design : c.tree_designs) {
      auto fixed_tree = design == TreeDesign::MTree ? std::make_shared<const ReferralTree>(m_tree(c.m, c.waves))
                                                    : nullptr;
      for (Replacement mode : c.replacement_modes) {
        if (mode == Replacement::Without) {
          double expected = 0.0, level = 1.0;
          const double growth = design == TreeDesign::MTree ? c.m : gw_law.mean();
          for (unsigned w = 0; w <= c.waves; ++w, level *= growth) expected += level;
          if (expected > static_cast<double>(g.size()))
            throw Error(ErrorKind::Config, "without-replacement sample of ~" + std::to_string(expected) +
                                               " nodes exceeds the population of " + std::to_string(g.size()));
        }
        std::vector<double> mean_est(c.replications), vh_est(c.replications), sizes(c.replications);
        std::vector<std::size_t> trunc(c.replications);
        parallel_for(c.replications, c.threads, [&](std::size_t rep) {
          Rng rng = make_stream(c.seed, kQqStreams + scenario, rep);
          auto tree = fixed_tree ? fixed_tree
                                 : std::make_shared<const ReferralTree>(galton_watson_waves(gw_law, c.waves, rng));
          WalkSample s = mode == Replacement::With ? tp_walk(g, tree, RootSpec{}, rng)
                                                   : tp_walk_without_replacement(g, tree, RootSpec{}, rng);
          const auto& obs = observe_feature(s, y);
          mean_est[rep] = sample_mean(obs);
          vh_est[rep] = vh_estimate(obs, s.deg_obs);
          sizes[rep] = static_cast<double>(obs.size());
          trunc[rep] = s.truncations;
        });
        const double mean_n = moments(sizes).mean;
        const std::size_t total_trunc = std::accumulate(trunc.begin(), trunc.end(), std::size_t{0});
        for (int e = 0; e < 2; ++e) {
          QqSeries series;
          series.scenario = scenario;
          series.lambda2_target = target;
          series.lambda2_realized = realized;
          series.tree = design;
          series.replacement = mode;
          series.estimator = e == 0 ? "mean" : "vh";
          series.estimates = e == 0 ? mean_est : vh_est;
          series.standardized = standardize(series.estimates);
          series.diagnostics = normality_diagnostics(series.estimates);
          series.mean_sample_size = mean_n;
          series.truncations = total_trunc;
          result.series.push_back(std::move(series));
        }
        ++scenario;
      }
    }
  }
  return result;
}

void write_qq_csv(std::ostream& out, const QqResult& r) {
  out << "scenario,lambda2,tree,replacement,estimator,rep,standardized,normal_q\n";
  for (const auto& s : r.series) {
    const std::size_t n = s.standardized.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s.standardized[a] < s.standardized[b]; });
    const std::vector<double> q = plotting_quantiles(n);
    const std::string prefix = std::to_string(s.scenario) + ',' + format_double(s.lambda2_target) + ',' +
                               to_string(s.tree, r.m) + ',' + to_string(s.replacement) + ',' + s.estimator + ',';
    for (std::size_t i = 0; i < n; ++i)
      out << prefix << order[i] << ',' << format_double(s.standardized[order[i]]) << ',' << format_double(q[i])
          << '\n';
  }
}

void write_qq_summary_csv(std::ostream& out, const QqResult& r) {
  out << "scenario,lambda2,lambda2_realized,tree,replacement,estimator,qq_correlation,skewness,excess_kurtosis,"
         "mean_n,truncations\n";
  for (const auto& s : r.series)
    out << s.scenario << ',' << format_double(s.lambda2_target) << ',' << format_double(s.lambda2_realized) << ','
        << to_string(s.tree, r.m) << ',' << to_string(s.replacement) << ',' << s.estimator << ','
        << format_double(s.diagnostics.qq_correlation) << ',' << format_double(s.diagnostics.skewness) << ','
        << format_double(s.diagnostics.excess_kurtosis) << ',' << format_double(s.mean_sample_size) << ','
        << s.truncations << '\n';
}

// ------------------------------------------------------------- power / MSE

FeatureTruth feature_truth(const Graph& g, std::span<const double> y) {
  if (y.size() != g.size()) throw Error(ErrorKind::Dimension, "feature does not match the graph");
  const auto pi = g.pi();
  const auto deg = g.degrees();
  const double big = static_cast<double>(g.size());
  FeatureTruth t;
  t.mu = std::accumulate(y.begin(), y.end(), 0.0) / big;
  std::vector<double> yp(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) yp[i] = y[i] * (1.0 - g.mean_degree() / deg[i]);
  t.bias = pi_mean(yp, pi);
  t.var_prime = pi_variance(yp, pi);
  const double pbar = 1.0 / big;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sxy += (pi[i] - pbar) * (y[i] - t.mu);
    sxx += (pi[i] - pbar) * (pi[i] - pbar);
    syy += (y[i] - t.mu) * (y[i] - t.mu);
  }
  t.cor_pi = sxx > 0.0 && syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
  return t;
}

double analytic_power(double bias, double var_prime, std::size_t n, double alpha) {
  const boost::math::normal normal;
  const double z = critical_value(alpha);
  if (!(var_prime > 0.0)) return bias != 0.0 ? 1.0 : 0.0;
  const double shift = std::sqrt(static_cast<double>(n)) * std::abs(bias) / std::sqrt(var_prime);
  return boost::math::cdf(normal, -z + shift) + boost::math::cdf(normal, -z - shift);
}

PowerResult run_power(const ExperimentConfig& c, const PopulationData& pop) {
  validate(c);
  const Graph& g = pop.graph;
  const OffspringLaw law(c.walk_offspring);
  const auto wants = [&](int s) { return std::find(c.scenarios.begin(), c.scenarios.end(), s) != c.scenarios.end(); };
  PowerResult result;
  const auto idx = feature_indices(c, pop);
  for (std::size_t fi = 0; fi < idx.size(); ++fi) {
    const std::string& name = pop.names[idx[fi]];
    const std::vector<double>& y = pop.features[idx[fi]];
    const FeatureTruth truth = feature_truth(g, y);
    for (std::size_t ni = 0; ni < c.sample_sizes.size(); ++ni) {
      const std::size_t n = c.sample_sizes[ni];
      const std::uint64_t cell = (idx[fi] * 1024 + ni) * 8;
      auto push = [&](int scenario, std::span<const char> rejects) {
        double hits = 0.0;
        for (char r : rejects) hits += r ? 1.0 : 0.0;
        const double p = hits / static_cast<double>(rejects.size());
        result.rows.push_back({name, scenario, n, p, std::sqrt(p * (1.0 - p) / static_cast<double>(rejects.size()))});
      };

      if (wants(1)) result.rows.push_back({name, 1, n, analytic_power(truth.bias, truth.var_prime, n, c.alpha), 0.0});

      if (wants(2)) {
        std::vector<char> rejects(c.replications);
        parallel_for(c.replications, c.threads, [&](std::size_t rep) {
          Rng rng = make_stream(c.seed, kPowerStreams + cell + 2, rep);
          std::vector<double> yo(n), dg(n);
          for (std::size_t k = 0; k < n; ++k) {
            const NodeId v = g.draw_stationary(uniform01(rng));
            yo[k] = y[v];
            dg[k] = g.degrees()[v];
          }
          const double bias_hat = bias_statistic(yo, dg);
          rejects[rep] = bias_test(bias_hat, truth.var_prime / static_cast<double>(n), c.alpha).reject;
        });
        push(2, rejects);
      }

      if (wants(3) || wants(4)) {
        double true_var = 0.0;
        if (wants(3)) {
          std::vector<double> pilot(c.pilot_replications);
          parallel_for(c.pilot_replications, c.threads, [&](std::size_t rep) {
            Rng rng = make_stream(c.seed, kPilotStreams + cell, rep);
            const WalkDraw d = draw_walk(g, y, law, n, rng);
            pilot[rep] = bias_statistic(d.y, d.deg);
          });
          true_var = sample_variance(pilot);
        }
        // Scenarios 3 and 4 share walks so their powers are paired.
        std::vector<char> rej3(c.replications), rej4(c.replications);
        parallel_for(c.replications, c.threads, [&](std::size_t rep) {
          Rng rng = make_stream(c.seed, kPowerStreams + cell + 3, rep);
          const WalkDraw d = draw_walk(g, y, law, n, rng);
          const double bias_hat = bias_statistic(d.y, d.deg);
          if (wants(3)) rej3[rep] = bias_test(bias_hat, true_var, c.alpha).reject;
          if (wants(4)) {
            const std::vector<double> yp = bias_feature(d.y, d.deg, harmonic_mean_degree(d.deg));
            const PluginVariance pv = plugin_variance(d.sample, yp, distance_pgf(*d.sample.tree));
            rej4[rep] = bias_test(bias_hat, pv.sigma_hat_sq, c.alpha).reject;
          }
        });
        if (wants(3)) push(3, rej3);
        if (wants(4)) push(4, rej4);
      }
    }
  }
  return result;
}

void write_power_csv(std::ostream& out, const PowerResult& r) {
  out << "feature,scenario,n,power,se\n";
  for (const auto& row : r.rows)
    out << row.feature << ',' << row.scenario << ',' << row.n << ',' << format_double(row.power) << ','
        << format_double(row.se) << '\n';
}

MseResult run_mse(const ExperimentConfig& c, const PopulationData& pop) {
  validate(c);
  const Graph& g = pop.graph;
  const OffspringLaw law(c.walk_offspring);
  MseResult result;
  const auto idx = feature_indices(c, pop);
  for (std::size_t fi = 0; fi < idx.size(); ++fi) {
    const std::string& name = pop.names[idx[fi]];
    const std::vector<double>& y = pop.features[idx[fi]];
    const double mu = feature_truth(g, y).mu;
    Crossover cross{name, std::nullopt, ""};
    for (std::size_t ni = 0; ni < c.sample_sizes.size(); ++ni) {
      const std::size_t n = c.sample_sizes[ni];
      std::vector<double> se_mean(c.replications), se_ipw(c.replications), se_ba(c.replications);
      parallel_for(c.replications, c.threads, [&](std::size_t rep) {
        Rng rng = make_stream(c.seed, kMseStreams + idx[fi] * 1024 + ni, rep);
        const WalkDraw d = draw_walk(g, y, law, n, rng);
        const std::vector<double> yp = bias_feature(d.y, d.deg, harmonic_mean_degree(d.deg));
        const PluginVariance pv = plugin_variance(d.sample, yp, distance_pgf(*d.sample.tree));
        const EstimateReport r = make_estimate_report(d.y, d.deg, pv.sigma_hat_sq, c.alpha,
                                                      std::span<const double>(d.pi), g.size(), WeightedArm::IPW);
        se_mean[rep] = (r.mu_hat - mu) * (r.mu_hat - mu);
        se_ipw[rep] = (*r.mu_ipw - mu) * (*r.mu_ipw - mu);
        se_ba[rep] = (r.mu_ba - mu) * (r.mu_ba - mu);
      });
      const Moments m_mean = moments(se_mean), m_ipw = moments(se_ipw), m_ba = moments(se_ba);
      result.rows.push_back({name, "mean", n, m_mean.mean, m_mean.se});
      result.rows.push_back({name, "ipw", n, m_ipw.mean, m_ipw.se});
      result.rows.push_back({name, "ba", n, m_ba.mean, m_ba.se});
      std::vector<double> d1(c.replications), d2(c.replications);
      for (std::size_t k = 0; k < c.replications; ++k) {
        d1[k] = se_ba[k] - se_mean[k];
        d2[k] = se_ba[k] - se_ipw[k];
      }
      const Moments c1 = moments(d1), c2 = moments(d2);
      result.contrasts.push_back({name, n, c1.mean, c1.se, c2.mean, c2.se});
      if (!cross.n && m_ipw.mean < m_mean.mean) cross.n = n;
    }
    const std::size_t max_n = c.sample_sizes.empty() ? 0 : *std::max_element(c.sample_sizes.begin(), c.sample_sizes.end());
    cross.label = cross.n ? std::to_string(*cross.n) : "> " + std::to_string(max_n);
    result.crossovers.push_back(cross);
  }
  return result;
}

void write_mse_csv(std::ostream& out, const MseResult& r) {
  out << "feature,estimator,n,mse,se\n";
  for (const auto& row : r.rows)
    out << row.feature << ',' << row.estimator << ',' << row.n << ',' << format_double(row.mse) << ','
        << format_double(row.se) << '\n';
}

void write_crossover_csv(std::ostream& out, const MseResult& r) {
  out << "feature,crossover\n";
  for (const auto& x : r.crossovers) out << x.feature << ',' << x.label << '\n';
}

// ----------------------------------------------------------- convexity scan

PgfResult run_pgf_scan(const ExperimentConfig& c) {
  validate(c);
  const OffspringLaw law(c.pgf_offspring);
  std::vector<std::optional<PgfTree>> slots(c.trees);
  parallel_for(c.trees, c.threads, [&](std::size_t t) {
    Rng rng = make_stream(c.seed, kPgfStreams, t);
    ReferralTree tree = galton_watson_capped(law, c.node_cap, rng);
    if (c.pgf_exact_cap) tree = tree.prefix(c.node_cap);
    DistancePGF pgf = distance_pgf(tree);
    ConvexityScan scan = convexity_scan(pgf, c.z_min, c.z_step);
    slots[t] = PgfTree{t, tree.size(), std::move(pgf), std::move(scan)};
  });
  PgfResult result;
  for (auto& s : slots) result.trees.push_back(std::move(*s));
  return result;
}

void write_pgf_scan_csv(std::ostream& out, const PgfResult& r) {
  out << "tree_id,z,G,Gpp,nonconvex\n";
  for (const auto& t : r.trees)
    for (const auto& pt : t.scan.points)
      out << t.tree_id << ',' << format_double(pt.z) << ',' << format_double(t.pgf(pt.z)) << ','
          << format_double(pt.d2g) << ',' << (pt.d2g < -kConvexityTol ? 1 : 0) << '\n';
}

PopulationData load_population(const ExperimentConfig& c) {
  if (c.edge_list.empty()) {
    Rng rng = make_stream(c.seed, kSurrogateStreams, 0);
    return surrogate_network(c.surrogate, rng);
  }
  std::ifstream edges(c.edge_list);
  if (!edges) throw Error(ErrorKind::Config, "cannot open edge list " + c.edge_list);
  PopulationData pop{read_edge_list(edges), {}, {}};
  if (c.attributes.empty()) throw Error(ErrorKind::Config, "an edge list needs an attribute file");
  std::vector<std::string> names = c.features;
  if (names.empty()) {
    std::ifstream head(c.attributes);
    std::string line;
    if (!head || !std::getline(head, line)) throw Error(ErrorKind::Config, "cannot read " + c.attributes);
    auto cells = split_csv_line(line);
    names.assign(cells.begin() + (cells.empty() ? 0 : 1), cells.end());
  }
  for (const auto& name : names) {
    std::ifstream attr(c.attributes);
    if (!attr) throw Error(ErrorKind::Config, "cannot open attribute file " + c.attributes);
    pop.features.push_back(read_node_attribute(attr, name, pop.graph));
    pop.names.push_back(name);
  }
  return pop;
}

}  // namespace rdslab
