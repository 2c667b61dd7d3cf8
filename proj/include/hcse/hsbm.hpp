#pragma once

// Hierarchical stochastic block model.
//
// The planted tree has depth L + 1 for L cluster levels: the root, then
// level_cluster_counts[0] clusters, ..., level_cluster_counts[L-1] bottom
// clusters, then the vertices. Two vertices are joined with probability
// p[d], where d is the depth of the planted lowest common ancestor of their
// bottom clusters (d = L when they share a bottom cluster).
//
// Randomness: three std::mt19937_64 streams seeded from splitmix64(seed + i)
// for i = 1 (tree shape and cluster sizes), 2 (vertex shuffle) and 3 (edges).
// Uniform reals take the top 53 bits of a draw; bounded integers use
// rejection sampling on the full 64-bit output. Both are implementation
// independent, unlike the <random> distributions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "hcse/cluster_tree.hpp"
#include "hcse/errors.hpp"
#include "hcse/graph.hpp"

namespace hcse {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(splitmix64(seed + stream)) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw DomainError("Rng::below(0)");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound + 1) % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x > limit);
    return x % bound;
  }

 private:
  std::mt19937_64 engine_;
};

// Uniformly random composition of `total` into `parts` integers
// of at least `min_part`, via distinct cut points (Floyd's sampling).
inline std::vector<std::size_t> random_composition(std::size_t total, std::size_t parts,
                                                   std::size_t min_part, Rng& rng) {
  if (parts == 0) throw DomainError("composition into zero parts");
  if (total < parts * min_part) throw DomainError("composition infeasible");
  const std::size_t reduced = total - parts * (min_part - 1);  // parts of size >= 1
  // Choose parts - 1 distinct cuts from {1, ..., reduced - 1}.
  const std::size_t universe = reduced - 1, pick = parts - 1;
  std::unordered_set<std::size_t> chosen;
  std::vector<std::size_t> cuts;
  for (std::size_t j = universe - pick; j < universe; ++j) {
    std::size_t t = static_cast<std::size_t>(rng.below(j + 1));
    if (!chosen.insert(t).second) {
      chosen.insert(j);
      cuts.push_back(j + 1);
    } else {
      cuts.push_back(t + 1);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::size_t> sizes;
  std::size_t prev = 0;
  for (std::size_t c : cuts) {
    sizes.push_back(c - prev + (min_part - 1));
    prev = c;
  }
  sizes.push_back(reduced - prev + (min_part - 1));
  return sizes;
}

// kUniformComposition draws bottom-cluster sizes as a uniformly random
// composition with parts >= min_cluster_size; kBalanced makes them differ by
// at most one.
enum class SizeLaw { kUniformComposition, kBalanced };

struct HsbmSpec {
  std::size_t n = 0;
  std::vector<std::size_t> level_cluster_counts;  // shallow to deep
  std::vector<double> p;                          // p[d] for LCA depth d
  std::uint64_t seed = 1;
  std::size_t min_cluster_size = 2;
  SizeLaw size_law = SizeLaw::kUniformComposition;
};

inline void validate(const HsbmSpec& s) {
  const auto& c = s.level_cluster_counts;
  if (c.empty()) throw DomainError("hsbm: need at least one cluster level");
  if (c.front() == 0) throw DomainError("hsbm: cluster counts must be positive");
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (c[i] <= c[i - 1]) throw DomainError("hsbm: cluster counts must increase with depth");
  }
  if (s.p.size() != c.size() + 1) {
    throw DomainError("hsbm: need " + std::to_string(c.size() + 1) + " probabilities, got " +
                      std::to_string(s.p.size()));
  }
  for (std::size_t i = 0; i < s.p.size(); ++i) {
    if (!(s.p[i] >= 0.0 && s.p[i] <= 1.0)) throw DomainError("hsbm: probabilities must be in [0,1]");
    if (i > 0 && !(s.p[i] > s.p[i - 1])) {
      throw DomainError("hsbm: probabilities must increase strictly with depth");
    }
  }
  if (s.min_cluster_size == 0) throw DomainError("hsbm: min_cluster_size must be positive");
  if (s.n < c.back() * s.min_cluster_size) {
    throw DomainError("hsbm: " + std::to_string(s.n) + " vertices cannot fill " +
                      std::to_string(c.back()) + " bottom clusters of size >= " +
                      std::to_string(s.min_cluster_size));
  }
}

struct GroundTruth {
  ClusterTree tree;
  // level_partitions[j]: clusters at depth j + 1 of the planted tree.
  std::vector<std::vector<std::vector<Vertex>>> level_partitions;
};

struct HsbmInstance {
  Graph graph;
  GroundTruth truth;
};

inline HsbmInstance generate(const HsbmSpec& spec) {
  validate(spec);
  const auto& counts = spec.level_cluster_counts;
  const std::size_t depth = counts.size();
  Rng shape_rng(spec.seed, 1), shuffle_rng(spec.seed, 2), edge_rng(spec.seed, 3);

  // parent_of[l][i]: index at level l - 1 of cluster i at level l (level 0
  // is the top cluster level, whose parent is the root).
  std::vector<std::vector<std::size_t>> parent_of(depth);
  parent_of[0].assign(counts[0], 0);
  for (std::size_t l = 1; l < depth; ++l) {
    auto split = random_composition(counts[l], counts[l - 1], 1, shape_rng);
    for (std::size_t i = 0; i < split.size(); ++i) {
      parent_of[l].insert(parent_of[l].end(), split[i], i);
    }
  }
  const std::size_t bottom = counts.back();
  std::vector<std::size_t> sizes;
  if (spec.size_law == SizeLaw::kBalanced) {
    sizes.assign(bottom, spec.n / bottom);
    for (std::size_t i = 0; i < spec.n % bottom; ++i) ++sizes[i];
  } else {
    sizes = random_composition(spec.n, bottom, spec.min_cluster_size, shape_rng);
  }

  std::vector<Vertex> perm(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) perm[i] = static_cast<Vertex>(i);
  for (std::size_t i = spec.n; i > 1; --i) {
    std::swap(perm[i - 1], perm[shuffle_rng.below(i)]);
  }
  std::vector<std::size_t> cluster_of(spec.n);
  std::vector<std::vector<Vertex>> members(bottom);
  for (std::size_t b = 0, at = 0; b < bottom; ++b) {
    for (std::size_t k = 0; k < sizes[b]; ++k, ++at) {
      members[b].push_back(perm[at]);
      cluster_of[perm[at]] = b;
    }
    std::sort(members[b].begin(), members[b].end());
  }

  // ancestor[l][b]: index at level l of bottom cluster b's ancestor.
  std::vector<std::vector<std::size_t>> ancestor(depth, std::vector<std::size_t>(bottom));
  for (std::size_t b = 0; b < bottom; ++b) {
    std::size_t idx = b;
    for (std::size_t l = depth; l-- > 0;) {
      ancestor[l][b] = idx;
      idx = parent_of[l][idx];
    }
  }
  // lca_depth[a][b]: 0 is the root, depth for the same bottom cluster.
  std::vector<std::vector<std::size_t>> lca_depth(bottom, std::vector<std::size_t>(bottom, 0));
  for (std::size_t a = 0; a < bottom; ++a) {
    for (std::size_t b = 0; b < bottom; ++b) {
      std::size_t d = 0;
      while (d < depth && ancestor[d][a] == ancestor[d][b]) ++d;
      lca_depth[a][b] = d;
    }
  }

  std::vector<Edge> edges;
  for (Vertex u = 0; u < spec.n; ++u) {
    for (Vertex v = u + 1; v < spec.n; ++v) {
      const double p = spec.p[lca_depth[cluster_of[u]][cluster_of[v]]];
      if (edge_rng.uniform() < p) edges.push_back({u, v, 1.0});
    }
  }

  HsbmInstance inst;
  inst.graph = Graph::from_edges(spec.n, std::move(edges));

  ClusterTree tree(spec.n);
  std::vector<NodeId> prev{tree.root()};
  for (std::size_t l = 0; l < depth; ++l) {
    std::vector<NodeId> cur;
    for (std::size_t i = 0; i < counts[l]; ++i) {
      cur.push_back(tree.add_internal(prev[parent_of[l][i]]));
      tree.set_name(cur.back(), "L" + std::to_string(l + 1) + "." + std::to_string(i));
    }
    prev = std::move(cur);
  }
  for (std::size_t b = 0; b < bottom; ++b) {
    for (Vertex v : members[b]) tree.add_leaf(prev[b], v);
  }
  tree.recompute_caches(inst.graph);

  inst.truth.level_partitions.resize(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    inst.truth.level_partitions[l].resize(counts[l]);
    for (std::size_t b = 0; b < bottom; ++b) {
      auto& block = inst.truth.level_partitions[l][ancestor[l][b]];
      block.insert(block.end(), members[b].begin(), members[b].end());
    }
    for (auto& block : inst.truth.level_partitions[l]) std::sort(block.begin(), block.end());
  }
  inst.truth.tree = std::move(tree);
  return inst;
}

inline const std::vector<std::vector<Vertex>>& planted_partition(const GroundTruth& gt,
                                                                 std::size_t level) {
  if (level >= gt.level_partitions.size()) {
    throw DomainError("planted level " + std::to_string(level) + " does not exist");
  }
  return gt.level_partitions[level];
}

inline std::string to_string(SizeLaw law) {
  return law == SizeLaw::kBalanced ? "balanced" : "uniform";
}

inline SizeLaw size_law_from_string(const std::string& s) {
  if (s == "uniform") return SizeLaw::kUniformComposition;
  if (s == "balanced") return SizeLaw::kBalanced;
  throw DomainError("unknown size distribution '" + s + "' (expected uniform or balanced)");
}

// Config document: {"n", "level_cluster_counts", "p", "seed"?,
// "min_cluster_size"?, "size_distribution"?}.
inline nlohmann::json to_json(const HsbmSpec& s) {
  return nlohmann::json{{"n", s.n},
                        {"level_cluster_counts", s.level_cluster_counts},
                        {"p", s.p},
                        {"seed", s.seed},
                        {"min_cluster_size", s.min_cluster_size},
                        {"size_distribution", to_string(s.size_law)}};
}

inline HsbmSpec hsbm_spec_from_json(const nlohmann::json& doc) {
  HsbmSpec s;
  try {
    if (!doc.is_object()) throw ParseError("hsbm config: expected a JSON object");
    if (!doc.at("n").is_number_unsigned()) throw ParseError("hsbm config: n must be a non-negative integer");
    s.n = doc.at("n").get<std::size_t>();
    s.level_cluster_counts = doc.at("level_cluster_counts").get<std::vector<std::size_t>>();
    s.p = doc.at("p").get<std::vector<double>>();
    s.seed = doc.value("seed", std::uint64_t{1});
    s.min_cluster_size = doc.value("min_cluster_size", std::size_t{2});
    s.size_law = size_law_from_string(doc.value("size_distribution", std::string("uniform")));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("hsbm config: ") + e.what());
  } catch (const DomainError& e) {
    throw ParseError(std::string("hsbm config: ") + e.what());
  }
  return s;
}

}  // namespace hcse
