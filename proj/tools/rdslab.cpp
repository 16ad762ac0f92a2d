// Command-line driver: graph generation, single-sample simulation and
// estimation, and the Monte Carlo studies.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rdslab/csv.hpp"
#include "rdslab/errors.hpp"
#include "rdslab/estimators.hpp"
#include "rdslab/graph.hpp"
#include "rdslab/montecarlo.hpp"
#include "rdslab/spectrum.hpp"
#include "rdslab/surrogate.hpp"
#include "rdslab/tree.hpp"
#include "rdslab/variance.hpp"
#include "rdslab/walk.hpp"

namespace fs = std::filesystem;
using namespace rdslab;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open " + path);
  return in;
}

struct Globals {
  std::uint64_t seed = 1;
  std::string config;
  std::string out = "out";
  unsigned threads = 1;
  bool paper_scale = false;
  bool seed_set = false;
  bool threads_set = false;
};

ExperimentConfig experiment_config(const Globals& gl) {
  ExperimentConfig c;
  if (gl.paper_scale) c = paper_scale(c);
  if (!gl.config.empty()) apply_json(c, slurp(gl.config));
  if (gl.seed_set) c.seed = gl.seed;
  if (gl.threads_set) c.threads = gl.threads;
  c.out_dir = gl.out;
  validate(c);
  return c;
}

// Rebuilds the observed part of a sample from walk.csv and tree.csv.
WalkSample load_sample(const std::string& walk_path, const std::string& tree_path, std::vector<double>& y) {
  auto tin = open_input(tree_path);
  std::vector<std::string> rows;
  auto win = open_input(walk_path);
  std::string line;
  if (!std::getline(win, line) || line.rfind("tree_node,graph_node,wave,y,deg", 0) != 0)
    throw ParseError(1, "expected header tree_node,graph_node,wave,y,deg");
  std::vector<NodeId> nodes;
  std::vector<double> deg;
  std::size_t first = 0, ln = 1;
  while (std::getline(win, line)) {
    ++ln;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    try {
      const std::size_t tn = std::stoull(cells.at(0));
      if (nodes.empty()) first = tn;
      nodes.push_back(static_cast<NodeId>(std::stoul(cells.at(1))));
      y.push_back(std::stod(cells.at(3)));
      deg.push_back(std::stod(cells.at(4)));
    } catch (const std::exception&) {
      throw ParseError(ln, "malformed walk row");
    }
  }
  const bool artificial = first == 1;
  auto tree = std::make_shared<const ReferralTree>(read_tree_csv(tin, artificial));
  if (tree->size() != nodes.size() + first) throw Error(ErrorKind::Data, "walk and tree files disagree in size");
  WalkSample s;
  s.tree = tree;
  if (artificial) s.assignment.push_back(0);
  s.assignment.insert(s.assignment.end(), nodes.begin(), nodes.end());
  s.deg_obs = deg;
  s.y_obs = y;
  return s;
}

void print_report(const EstimateReport& r, const fs::path& out_file) {
  const std::string json = to_json(r);
  auto out = open_output(out_file);
  out << json << '\n';
  std::cout << json << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Respondent-driven sampling toolkit: tree-indexed walks, estimators, variance and simulation studies"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals gl;
  app.add_option("--seed", gl.seed, "Master seed")->each([&](const std::string&) { gl.seed_set = true; });
  app.add_option("--config", gl.config, "JSON configuration file");
  app.add_option("--out", gl.out, "Output directory");
  app.add_option("--threads", gl.threads, "Worker threads")->each([&](const std::string&) { gl.threads_set = true; });
  app.add_flag("--paper-scale", gl.paper_scale, "Use N = 5000 and R = 2000");

  // graph-gen
  auto* gen = app.add_subcommand("graph-gen", "Generate a two-block SBM graph or the synthetic surrogate network");
  std::size_t gen_n = 2000;
  double gen_p = -1.0, gen_r = -1.0, gen_lambda = 0.5, gen_sum = 0.01;
  bool gen_surrogate = false;
  gen->add_option("--n", gen_n, "Number of nodes");
  gen->add_option("--p", gen_p, "Within-block edge probability");
  gen->add_option("--r", gen_r, "Between-block edge probability");
  gen->add_option("--lambda2", gen_lambda, "Target lambda2 when p and r are not given");
  gen->add_option("--density-sum", gen_sum, "p + r when derived from lambda2");
  gen->add_flag("--surrogate", gen_surrogate, "Generate the synthetic friendship surrogate instead");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Draw one tree-indexed walk sample");
  std::string sim_graph, sim_attr, sim_feature, sim_tree = "m-tree", sim_mode = "with", sim_root = "stationary";
  unsigned sim_m = 2, sim_waves = 3;
  std::size_t sim_cap = 0;
  NodeId sim_root_node = 0;
  std::vector<double> sim_offspring{0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  bool sim_breakdown = false;
  sim->add_option("--graph", sim_graph, "Edge list")->required();
  sim->add_option("--attributes", sim_attr, "Node attribute CSV")->required();
  sim->add_option("--feature", sim_feature, "Feature column")->required();
  sim->add_option("--tree", sim_tree, "m-tree or gw")->check(CLI::IsMember({"m-tree", "gw"}));
  sim->add_option("--m", sim_m, "Offspring count of the m-tree");
  sim->add_option("--waves", sim_waves, "Number of waves after the seed");
  sim->add_option("--node-cap", sim_cap, "Grow a Galton-Watson tree until this many nodes (overrides --waves)");
  sim->add_option("--offspring", sim_offspring, "Galton-Watson offspring probabilities P(0), P(1), ...");
  sim->add_option("--replacement", sim_mode, "with or without")->check(CLI::IsMember({"with", "without"}));
  sim->add_option("--root", sim_root, "stationary, uniform or fixed")
      ->check(CLI::IsMember({"stationary", "uniform", "fixed"}));
  sim->add_option("--root-node", sim_root_node, "Input id of the fixed root");
  sim->add_flag("--breakdown", sim_breakdown, "Also write the exact variance breakdown for the sampled tree");

  // estimate / test-bias
  auto* est = app.add_subcommand("estimate", "Estimates and bias test from a sample");
  auto* tb = app.add_subcommand("test-bias", "Bias test from a sample");
  std::string in_walk, in_tree;
  double alpha = kDefaultAlpha;
  for (auto* sc : {est, tb}) {
    sc->add_option("--walk", in_walk, "walk.csv from simulate")->required();
    sc->add_option("--tree", in_tree, "tree.csv from simulate")->required();
    sc->add_option("--alpha", alpha, "Test level");
  }

  auto* qq = app.add_subcommand("qq", "Q-Q study on SBM graphs");
  auto* power = app.add_subcommand("power", "Power of the bias test by scenario and sample size");
  auto* mse = app.add_subcommand("mse", "MSE of the sample mean, IPW and bias-adjusted estimators");
  auto* pgf = app.add_subcommand("pgf-scan", "Convexity scan of G over Galton-Watson trees");

  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path out_dir = gl.out;
    if (gen->parsed()) {
      if (gen_surrogate) {
        ExperimentConfig c = experiment_config(gl);
        const PopulationData pop = load_population(c);
        auto edges = open_output(out_dir / "edges.txt");
        write_edge_list(edges, pop.graph);
        auto attrs = open_output(out_dir / "attributes.csv");
        write_node_attributes(attrs, pop.graph, pop.names, pop.features);
        std::cout << "surrogate: " << pop.graph.size() << " nodes, " << pop.graph.edge_count() << " edges\n";
        return 0;
      }
      std::uint64_t seed = gl.seed;
      if (!gl.config.empty()) {
        const auto j = nlohmann::json::parse(slurp(gl.config));
        if (j.contains("n")) gen_n = j["n"].get<std::size_t>();
        if (j.contains("p")) gen_p = j["p"].get<double>();
        if (j.contains("r")) gen_r = j["r"].get<double>();
        if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
      }
      if (gl.seed_set) seed = gl.seed;
      if (gen_p < 0.0 || gen_r < 0.0) std::tie(gen_p, gen_r) = sbm_parameters_for(gen_lambda, gen_sum);
      Rng rng = make_stream(seed, 0, 0);
      const SbmGraph sbm = sbm_sample(gen_n, gen_p, gen_r, rng);
      auto edges = open_output(out_dir / "edges.txt");
      write_edge_list(edges, sbm.graph);
      std::vector<double> block(sbm.block.begin(), sbm.block.end());
      const std::vector<std::string> names{"block"};
      const std::vector<std::vector<double>> cols{block};
      auto attrs = open_output(out_dir / "attributes.csv");
      write_node_attributes(attrs, sbm.graph, names, cols);
      nlohmann::json cfg{{"n", gen_n}, {"p", gen_p}, {"r", gen_r}, {"seed", seed}};
      auto cfg_out = open_output(out_dir / "sbm.json");
      cfg_out << cfg.dump(2) << '\n';
      std::cout << "sbm: " << sbm.graph.size() << " nodes, " << sbm.graph.edge_count()
                << " edges, target lambda2 " << sbm.target_lambda2 << '\n';
      return 0;
    }

    if (sim->parsed()) {
      auto gin = open_input(sim_graph);
      const Graph g = read_edge_list(gin);
      auto ain = open_input(sim_attr);
      const std::vector<double> y = read_node_attribute(ain, sim_feature, g);
      Rng rng = make_stream(gl.seed, 0, 0);
      std::shared_ptr<const ReferralTree> tree;
      if (sim_tree == "m-tree") {
        tree = std::make_shared<const ReferralTree>(m_tree(sim_m, sim_waves));
      } else {
        const OffspringLaw law(sim_offspring);
        tree = std::make_shared<const ReferralTree>(sim_cap > 0 ? galton_watson_capped(law, sim_cap, rng)
                                                                : galton_watson_waves(law, sim_waves, rng));
      }
      RootSpec root;
      if (sim_root == "uniform") root.mode = RootInit::Uniform;
      if (sim_root == "fixed") {
        root.mode = RootInit::Fixed;
        const auto ids = g.original_ids();
        const auto it = std::find(ids.begin(), ids.end(), sim_root_node);
        if (it == ids.end()) throw Error(ErrorKind::Argument, "root node not in the retained graph");
        root.node = static_cast<NodeId>(it - ids.begin());
      }
      WalkSample s = sim_mode == "with" ? tp_walk(g, tree, root, rng, gl.seed)
                                        : tp_walk_without_replacement(g, tree, root, rng, gl.seed);
      observe_feature(s, y);
      auto wout = open_output(out_dir / "walk.csv");
      write_walk_csv(wout, s, g);
      auto tout = open_output(out_dir / "tree.csv");
      write_tree_csv(tout, *s.tree);
      std::cout << "sample: " << s.observed() << " observations, " << s.truncations << " truncated branches\n";
      if (sim_breakdown) {
        const Spectrum spec = spectral_decomposition(g);
        const VarianceBreakdown b = exact_mean_variance(distance_pgf(*s.tree), spec, y);
        auto bout = open_output(out_dir / "variance_breakdown.csv");
        write_breakdown_csv(bout, b);
        auto jout = open_output(out_dir / "variance_summary.json");
        jout << breakdown_summary_json(b) << '\n';
      }
      return 0;
    }

    if (est->parsed() || tb->parsed()) {
      std::vector<double> y;
      const WalkSample s = load_sample(in_walk, in_tree, y);
      const std::vector<double> yp = bias_feature(y, s.deg_obs, harmonic_mean_degree(s.deg_obs));
      const PluginVariance pv = plugin_variance(s, yp, distance_pgf(*s.tree));
      const EstimateReport r = make_estimate_report(y, s.deg_obs, pv.sigma_hat_sq, alpha);
      if (est->parsed()) {
        print_report(r, out_dir / "estimate.json");
      } else {
        nlohmann::json j{{"bias_hat", r.bias_hat},   {"sigma_hat_sq", r.sigma_hat_sq},
                         {"z", std::isfinite(r.z) ? nlohmann::json(r.z) : nlohmann::json(r.z > 0 ? "inf" : "-inf")},
                         {"z_critical", critical_value(alpha)}, {"reject", r.reject},
                         {"degenerate", r.degenerate || pv.degenerate}, {"R_hat", pv.r_hat},
                         {"convention", "var_of_mean"}};
        auto out = open_output(out_dir / "test_bias.json");
        out << j.dump(2) << '\n';
        std::cout << j.dump(2) << '\n';
      }
      return 0;
    }

    const ExperimentConfig c = experiment_config(gl);
    if (qq->parsed()) {
      const QqResult r = run_qq(c);
      auto out = open_output(out_dir / "qq.csv");
      write_qq_csv(out, r);
      auto sum = open_output(out_dir / "qq_summary.csv");
      write_qq_summary_csv(sum, r);
      write_qq_summary_csv(std::cout, r);
    } else if (power->parsed()) {
      const PopulationData pop = load_population(c);
      const PowerResult r = run_power(c, pop);
      auto out = open_output(out_dir / "power.csv");
      write_power_csv(out, r);
      write_power_csv(std::cout, r);
    } else if (mse->parsed()) {
      const PopulationData pop = load_population(c);
      const MseResult r = run_mse(c, pop);
      auto out = open_output(out_dir / "mse.csv");
      write_mse_csv(out, r);
      auto cross = open_output(out_dir / "crossover.csv");
      write_crossover_csv(cross, r);
      write_crossover_csv(std::cout, r);
    } else if (pgf->parsed()) {
      const PgfResult r = run_pgf_scan(c);
      auto out = open_output(out_dir / "pgf.csv");
      write_pgf_scan_csv(out, r);
      std::size_t nonconvex = 0;
      for (const auto& t : r.trees) nonconvex += t.scan.convex() ? 0 : 1;
      std::cout << r.trees.size() << " trees, " << nonconvex << " with a nonconvex G\n";
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
