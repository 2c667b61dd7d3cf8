#pragma once

// Agreement between a cluster tree and planted clusterings.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "hcse/cluster_tree.hpp"
#include "hcse/errors.hpp"
#include "hcse/graph.hpp"

namespace hcse {

struct FlatPartition {
  std::vector<std::vector<Vertex>> blocks;

  // Block index of every vertex of {0, ..., n-1}. Throws DomainError unless
  // the blocks are non-empty, disjoint and cover exactly that set.
  std::vector<std::size_t> labels(std::size_t n) const {
    constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> out(n, kUnset);
    std::size_t seen = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (blocks[b].empty()) throw DomainError("partition has an empty block");
      for (Vertex v : blocks[b]) {
        if (v >= n) throw DomainError("partition mentions a vertex outside the universe");
        if (out[v] != kUnset) throw DomainError("partition blocks overlap");
        out[v] = b;
        ++seen;
      }
    }
    if (seen != n) throw DomainError("partition does not cover the universe");
    return out;
  }

  std::size_t universe_size() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.size();
    return n;
  }
};

// Clusters one level below internal level j, i.e. the parts that level j's
// triangles split V into. j = height - 1 yields singletons.
inline FlatPartition partition_at_level(const ClusterTree& t, std::size_t j) {
  const auto lv = levels(t);
  if (j >= lv.size()) throw DomainError("level " + std::to_string(j) + " does not exist");
  FlatPartition out;
  if (j + 1 == lv.size()) {
    for (std::size_t v = 0; v < t.num_vertices(); ++v) out.blocks.push_back({static_cast<Vertex>(v)});
    return out;
  }
  for (NodeId id : lv[j + 1]) {
    auto leaves = t.leaves_under(id);
    std::sort(leaves.begin(), leaves.end());
    out.blocks.push_back(std::move(leaves));
  }
  return out;
}

enum class NmiNormalization { kArithmetic, kGeometric };

// I(A;B) / mean(H(A), H(B)) with plug-in entropies in bits. When the
// normaliser is zero the result is 1 for identical partitions and 0 otherwise.
inline double nmi(const FlatPartition& a, const FlatPartition& b,
                  NmiNormalization norm = NmiNormalization::kArithmetic) {
  const std::size_t n = a.universe_size();
  if (n == 0 || b.universe_size() != n) throw DomainError("nmi: partitions over different universes");
  const auto la = a.labels(n);
  const auto lb = b.labels(n);

  std::map<std::pair<std::size_t, std::size_t>, std::size_t> joint;
  std::vector<std::size_t> ca(a.blocks.size(), 0), cb(b.blocks.size(), 0);
  for (std::size_t v = 0; v < n; ++v) {
    ++joint[{la[v], lb[v]}];
    ++ca[la[v]];
    ++cb[lb[v]];
  }
  const double total = static_cast<double>(n);
  auto entropy = [&](const std::vector<std::size_t>& counts) {
    double h = 0.0;
    for (std::size_t c : counts) {
      if (c > 0) {
        const double p = static_cast<double>(c) / total;
        h -= p * std::log2(p);
      }
    }
    return h;
  };
  const double ha = entropy(ca), hb = entropy(cb);
  double mi = 0.0;
  for (const auto& [key, c] : joint) {
    const double pij = static_cast<double>(c) / total;
    const double pi = static_cast<double>(ca[key.first]) / total;
    const double pj = static_cast<double>(cb[key.second]) / total;
    mi += pij * std::log2(pij / (pi * pj));
  }
  const double denom = norm == NmiNormalization::kArithmetic ? (ha + hb) / 2.0 : std::sqrt(ha * hb);
  if (!(denom > 0.0)) {
    // Same partition iff the joint table is a bijection between blocks.
    const bool same = joint.size() == a.blocks.size() && joint.size() == b.blocks.size();
    return same ? 1.0 : 0.0;
  }
  return std::clamp(mi / denom, 0.0, 1.0);
}

inline double jaccard(std::span<const Vertex> a, std::span<const Vertex> b) {
  std::vector<Vertex> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::vector<Vertex> common;
  std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(common));
  const std::size_t uni = x.size() + y.size() - common.size();
  return uni == 0 ? 1.0 : static_cast<double>(common.size()) / static_cast<double>(uni);
}

// Mean over truth clusters of the best Jaccard index achieved by any internal
// node of the tree (the root included, leaves excluded).
inline double avg_jaccard(const ClusterTree& t, std::span<const std::vector<Vertex>> truth) {
  if (truth.empty()) throw DomainError("avg_jaccard: no truth clusters");
  std::vector<std::size_t> overlap(t.arena_size(), 0);
  std::vector<NodeId> touched;
  double sum = 0.0;
  for (const auto& cluster : truth) {
    if (cluster.empty()) throw DomainError("avg_jaccard: empty truth cluster");
    std::vector<Vertex> c(cluster.begin(), cluster.end());
    std::sort(c.begin(), c.end());
    if (std::adjacent_find(c.begin(), c.end()) != c.end()) {
      throw DomainError("avg_jaccard: repeated vertex in a truth cluster");
    }
    for (Vertex v : c) {
      NodeId x = t.parent(t.leaf_of(v));
      while (true) {
        if (overlap[x]++ == 0) touched.push_back(x);
        if (x == t.root()) break;
        x = t.parent(x);
      }
    }
    double best = 0.0;
    for (NodeId x : touched) {
      const double inter = static_cast<double>(overlap[x]);
      const double uni = static_cast<double>(t.node(x).size + c.size()) - inter;
      best = std::max(best, inter / uni);
      overlap[x] = 0;
    }
    touched.clear();
    sum += best;
  }
  return sum / static_cast<double>(truth.size());
}

}  // namespace hcse
