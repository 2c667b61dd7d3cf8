#pragma once

// Command-line front end. run() is the whole program minus process setup, so
// tests can drive it with string vectors and capture both streams.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hcse/cluster_tree.hpp"
#include "hcse/costs.hpp"
#include "hcse/graph.hpp"
#include "hcse/hcse.hpp"
#include "hcse/hsbm.hpp"
#include "hcse/metrics.hpp"
#include "hcse/oracle.hpp"

namespace hcse::cli {

// Exit status for every failure: bad flags, IO, parse and domain errors.
inline constexpr int kExitFailure = 2;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline Graph read_graph(const std::string& path) {
  try {
    return load_edge_list_from_string(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// Ground-truth document written by gen-hsbm and read by eval.
inline nlohmann::json truth_to_json(const GroundTruth& gt, const Graph& g) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& part : gt.level_partitions) {
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& block : part) {
      nlohmann::json labels = nlohmann::json::array();
      for (Vertex v : block) labels.push_back(g.label(v));
      blocks.push_back(std::move(labels));
    }
    levels.push_back(std::move(blocks));
  }
  return {{"levels", std::move(levels)}, {"tree", serialize(gt.tree, g)}};
}

// levels[j] is the planted partition one level below depth j.
inline std::vector<FlatPartition> truth_levels_from_json(const nlohmann::json& doc, const Graph& g) {
  std::vector<FlatPartition> out;
  try {
    for (const auto& level : doc.at("levels")) {
      FlatPartition part;
      for (const auto& block : level) {
        std::vector<Vertex> ids;
        for (const auto& label : block) {
          const auto name = label.get<std::string>();
          const auto v = g.find_vertex(name);
          if (v == Graph::npos) throw DomainError("truth mentions unknown vertex '" + name + "'");
          ids.push_back(static_cast<Vertex>(v));
        }
        part.blocks.push_back(std::move(ids));
      }
      part.labels(g.num_vertices());
      out.push_back(std::move(part));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("truth document: ") + e.what());
  }
  if (out.empty()) throw ParseError("truth document has no levels");
  return out;
}

struct ClusterConfig {
  std::string input;
  std::string out;
  std::optional<std::size_t> k;
  std::size_t max_rounds = 12;
  std::string local_entropy = "child";
  int inflection_from = 3;
  bool validate = false;
};

inline int cmd_cluster(const ClusterConfig& cfg, std::ostream& out) {
  const Graph g = read_graph(cfg.input);
  if (g.num_vertices() == 0) throw DomainError(cfg.input + ": graph is empty");
  if (!(g.total_volume() > 0.0)) throw DomainError(cfg.input + ": graph has no edges");

  HcseOptions opts;
  opts.variant = cfg.local_entropy == "parent" ? LocalEntropyVariant::kParentCut
                                               : LocalEntropyVariant::kChildCut;
  opts.boundary = cfg.inflection_from == 2 ? InflectionBoundary::kAllowTwo
                                           : InflectionBoundary::kFromThree;
  opts.validate = cfg.validate;

  ClusterTree tree;
  StratificationTrace trace;
  std::vector<std::string> warnings;
  std::ostringstream run;
  if (cfg.k) {
    auto r = k_hcse(g, *cfg.k, opts);
    tree = std::move(r.tree);
    trace = std::move(r.trace);
    warnings = std::move(r.warnings);
  } else {
    auto r = hcse_auto(g, cfg.max_rounds, opts);
    run << "chosen_t=" << r.chosen_height << '\n'
        << "inflection_found=" << (r.inflection_found ? "true" : "false") << '\n'
        << "stopped_early=" << (r.stopped_early ? "true" : "false") << '\n';
    tree = std::move(r.tree);
    trace = std::move(r.trace);
    warnings = std::move(r.warnings);
  }

  std::ostringstream report;
  report << "command=cluster\n"
         << "input=" << cfg.input << '\n'
         << "mode=" << (cfg.k ? "fixed" : "auto") << '\n'
         << "k=" << (cfg.k ? std::to_string(*cfg.k) : "") << '\n'
         << "max_rounds=" << cfg.max_rounds << '\n'
         << "local_entropy=" << cfg.local_entropy << '\n'
         << "inflection_from=" << cfg.inflection_from << '\n'
         << "validate=" << (cfg.validate ? "true" : "false") << '\n'
         << "vertices=" << g.num_vertices() << '\n'
         << "edges=" << g.num_edges() << '\n'
         << run.str()
         << "height=" << tree.height() << '\n'
         << "rounds=" << trace.rounds.size() << '\n'
         << to_key_value(cost_report(g, tree));
  if (trace.validation) {
    const auto& v = *trace.validation;
    report << "validation_trials=" << v.trials << '\n'
           << "validation_max_merge_gain_error=" << format_real(v.max_merge_gain_error) << '\n'
           << "validation_max_penalty_error=" << format_real(v.max_penalty_error) << '\n'
           << "validation_max_trial_delta_error=" << format_real(v.max_trial_delta_error) << '\n'
           << "validation_max_round_delta_error=" << format_real(v.max_round_delta_error) << '\n';
  }
  for (const auto& w : warnings) report << "warning=" << w << '\n';

  write_file(cfg.out + ".tree.json", serialize_to_string(tree, g));
  write_file(cfg.out + ".report.txt", report.str());
  write_file(cfg.out + ".trace.csv", trace_csv(trace));
  write_file(cfg.out + ".sparsity.csv", sparsity_csv(trace));
  out << report.str();
  return 0;
}

struct GenConfig {
  std::string config;
  std::string out;
  std::size_t n = 0;
  std::vector<std::size_t> counts;
  std::vector<double> p;
  std::uint64_t seed = 1;
  std::size_t min_size = 2;
  std::string size_distribution = "uniform";
};

inline int cmd_gen_hsbm(const GenConfig& cfg, std::ostream& out) {
  HsbmSpec spec;
  if (!cfg.config.empty()) {
    spec = hsbm_spec_from_json(read_json(cfg.config));
  } else {
    spec.n = cfg.n;
    spec.level_cluster_counts = cfg.counts;
    spec.p = cfg.p;
    spec.seed = cfg.seed;
    spec.min_cluster_size = cfg.min_size;
    spec.size_law = size_law_from_string(cfg.size_distribution);
  }
  const auto inst = generate(spec);

  std::ostringstream edges;
  edges << "# hsbm n=" << spec.n << " seed=" << spec.seed << '\n';
  write_edge_list(edges, inst.graph);
  write_file(cfg.out + ".edges", edges.str());
  write_file(cfg.out + ".truth.json", truth_to_json(inst.truth, inst.graph).dump(1) + "\n");
  write_file(cfg.out + ".spec.json", to_json(spec).dump(1) + "\n");
  out << "vertices=" << inst.graph.num_vertices() << '\n'
      << "edges=" << inst.graph.num_edges() << '\n'
      << "levels=" << spec.level_cluster_counts.size() << '\n';
  return 0;
}

struct EvalConfig {
  std::string graph;
  std::string tree;
  std::string truth;
  std::string nmi = "arithmetic";
  bool csv = false;
};

inline int cmd_eval(const EvalConfig& cfg, std::ostream& out) {
  const Graph g = read_graph(cfg.graph);
  const ClusterTree t = deserialize(read_json(cfg.tree), g);
  std::vector<std::pair<std::string, std::string>> rows;  // key, value
  const auto costs = cost_report(g, t);
  rows.emplace_back("structural_entropy", format_real(costs.structural_entropy));
  rows.emplace_back("one_level_entropy", format_real(costs.one_level_entropy));
  rows.emplace_back("cost_se", format_real(costs.cost_se));
  rows.emplace_back("cost_dasgupta", format_real(costs.cost_dasgupta));
  rows.emplace_back("height", std::to_string(t.height()));

  if (!cfg.truth.empty()) {
    const auto truth = truth_levels_from_json(read_json(cfg.truth), g);
    const auto norm = cfg.nmi == "geometric" ? NmiNormalization::kGeometric : NmiNormalization::kArithmetic;
    const std::size_t tree_levels = t.height();
    std::vector<std::vector<Vertex>> all;
    for (std::size_t j = 0; j < truth.size(); ++j) {
      const std::string suffix = "_level_" + std::to_string(j);
      rows.emplace_back("nmi" + suffix,
                        j < tree_levels ? format_real(nmi(partition_at_level(t, j), truth[j], norm)) : "nan");
      rows.emplace_back("jaccard" + suffix, format_real(avg_jaccard(t, truth[j].blocks)));
      all.insert(all.end(), truth[j].blocks.begin(), truth[j].blocks.end());
    }
    rows.emplace_back("jaccard_mean", format_real(avg_jaccard(t, all)));
    rows.emplace_back("nmi_normalization", cfg.nmi);
  }

  if (cfg.csv) {
    out << "metric,value\n";
    for (const auto& [k, v] : rows) out << k << ',' << v << '\n';
  } else {
    for (const auto& [k, v] : rows) out << k << '=' << v << '\n';
  }
  return 0;
}

struct BruteConfig {
  std::string input;
  std::string cost = "se";
  std::string mode = "binary";
  std::string out;
};

inline int cmd_brute_min(const BruteConfig& cfg, std::ostream& out) {
  const Graph g = read_graph(cfg.input);
  CostFunctional cost = cost_se;
  if (cfg.cost == "dasgupta") {
    cost = cost_dasgupta;
  } else if (cfg.cost == "concave-exp") {
    cost = [](const Graph& gr, const ClusterTree& t) {
      return cost_concave(gr, t, [](double x) { return 1.0 - std::exp(-x); });
    };
  }
  const auto mode = cfg.mode == "multi" ? TreeMode::kMultifurcating : TreeMode::kBinary;
  const auto r = brute_min(g, cost, mode);

  out << "cost=" << cfg.cost << '\n'
      << "mode=" << cfg.mode << '\n'
      << "trees=" << r.trees_seen << '\n'
      << "min=" << format_real(r.min_value) << '\n'
      << "argmin_count=" << r.argmin.size() << '\n';
  bool balanced = !r.argmin.empty();
  for (const auto& t : r.argmin) balanced = balanced && is_balanced_binary(t);
  out << "argmin_all_balanced_binary=" << (balanced ? "true" : "false") << '\n';
  if (!cfg.out.empty()) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : r.argmin) trees.push_back(serialize(t, g));
    write_file(cfg.out, trees.dump(1) + "\n");
  }
  return 0;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical clustering by structural entropy minimisation", "hcse"};
  app.require_subcommand(1);

  ClusterConfig cc;
  auto* cluster = app.add_subcommand("cluster", "Build a cluster tree for an edge list");
  cluster->add_option("--input", cc.input, "Edge list file")->required();
  cluster->add_option("--out", cc.out, "Output prefix")->required();
  cluster->add_option("--k", cc.k, "Fixed tree height (default: choose automatically)")
      ->check(CLI::PositiveNumber);
  cluster->add_option("--max-rounds", cc.max_rounds, "Round limit for automatic height")
      ->capture_default_str()
      ->check(CLI::Range(3, 1000));
  cluster->add_option("--local-entropy", cc.local_entropy, "Cut weight in H(u)")
      ->capture_default_str()
      ->check(CLI::IsMember({"child", "parent"}));
  cluster->add_option("--inflection-from", cc.inflection_from, "Earliest inflection round")
      ->capture_default_str()
      ->check(CLI::IsMember({2, 3}));
  cluster->add_flag("--validate", cc.validate, "Check closed forms against full entropy");

  GenConfig gc;
  auto* gen = app.add_subcommand("gen-hsbm", "Sample a hierarchical stochastic block model");
  gen->add_option("--out", gc.out, "Output prefix")->required();
  auto* config = gen->add_option("--config", gc.config, "JSON spec file");
  auto* n = gen->add_option("--n", gc.n, "Vertex count");
  auto* counts = gen->add_option("--counts", gc.counts, "Cluster count per level, shallow to deep")
                     ->delimiter(',');
  auto* p = gen->add_option("--p", gc.p, "Edge probability per LCA depth")->delimiter(',');
  auto* seed = gen->add_option("--seed", gc.seed, "RNG seed")->capture_default_str();
  auto* min_size = gen->add_option("--min-size", gc.min_size, "Smallest bottom cluster")
                       ->capture_default_str();
  auto* dist = gen->add_option("--size-distribution", gc.size_distribution, "Bottom cluster sizes")
                   ->capture_default_str()
                   ->check(CLI::IsMember({"uniform", "balanced"}));
  for (auto* o : {n, counts, p, seed, min_size, dist}) config->excludes(o);
  n->needs(counts, p);

  EvalConfig ec;
  auto* eval = app.add_subcommand("eval", "Costs of a tree and agreement with a planted truth");
  eval->add_option("--graph", ec.graph, "Edge list file")->required();
  eval->add_option("--tree", ec.tree, "Tree document")->required();
  eval->add_option("--truth", ec.truth, "Ground-truth document from gen-hsbm");
  eval->add_option("--nmi", ec.nmi, "NMI normaliser")
      ->capture_default_str()
      ->check(CLI::IsMember({"arithmetic", "geometric"}));
  eval->add_flag("--csv", ec.csv, "Print CSV instead of key=value lines");

  BruteConfig bc;
  auto* brute = app.add_subcommand("brute-min", "Exhaustive cost minimum over all trees of a tiny graph");
  brute->add_option("--input", bc.input, "Edge list file")->required();
  brute->add_option("--cost", bc.cost, "Cost functional")
      ->capture_default_str()
      ->check(CLI::IsMember({"se", "dasgupta", "concave-exp"}));
  brute->add_option("--mode", bc.mode, "Tree family")
      ->capture_default_str()
      ->check(CLI::IsMember({"binary", "multi"}));
  brute->add_option("--out", bc.out, "Write every minimiser as a JSON array");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "hcse: " << e.what() << '\n';
    return kExitFailure;
  }

  try {
    if (*cluster) return cmd_cluster(cc, out);
    if (*gen) {
      if (gc.config.empty() && (gc.n == 0 || gc.counts.empty() || gc.p.empty())) {
        err << "hcse gen-hsbm: give --config or all of --n, --counts, --p\n";
        return kExitFailure;
      }
      return cmd_gen_hsbm(gc, out);
    }
    if (*eval) return cmd_eval(ec, out);
    if (*brute) return cmd_brute_min(bc, out);
  } catch (const std::exception& e) {
    err << "hcse: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace hcse::cli
