#pragma once

// Hierarchical clustering by structural entropy: level-by-level
// stratification of a cluster tree.
//
// A stratification round picks the level whose triangles (an internal node
// with its children) gain the most relative entropy from being restructured,
// and inserts one new level under every node of it. Each triangle is
// restructured locally on the quotient graph of its children: an
// agglomerative pass (stretch) builds a binary tree over the children by
// greedily merging the sibling pair with the largest entropy reduction, and
// a contraction pass (compress) flattens that binary tree back to height two
// by removing the cheapest edges first. All entropy changes are computed in
// closed form from quotient data; `HcseOptions::validate` replays them on a
// full tree copy and records the discrepancy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hcse/cluster_tree.hpp"
#include "hcse/costs.hpp"
#include "hcse/errors.hpp"
#include "hcse/graph.hpp"

namespace hcse {

// Which cut weight enters the per-node entropy H(u). kChildCut weights each
// child's term by that child's own cut, so H(u) is exactly u's share of the
// tree entropy. kParentCut uses u's cut for every term; it makes the root's
// share vanish and is kept only for comparison.
enum class LocalEntropyVariant { kChildCut, kParentCut };

// Earliest round index at which an inflection may be accepted. The rule
// needs the previous second difference, which first exists at t = 3;
// kAllowTwo treats the missing one as equal to the t = 2 value.
enum class InflectionBoundary { kFromThree, kAllowTwo };

struct HcseOptions {
  LocalEntropyVariant variant = LocalEntropyVariant::kChildCut;
  InflectionBoundary boundary = InflectionBoundary::kFromThree;
  bool validate = false;
};

inline double local_entropy(const ClusterTree& t, const Graph& g, NodeId u,
                            LocalEntropyVariant variant = LocalEntropyVariant::kChildCut) {
  if (t.is_leaf(u)) throw DomainError("local_entropy: node " + std::to_string(u) + " is a leaf");
  const double vol = g.total_volume();
  if (!(vol > 0.0)) throw DomainError("graph has no edges (vol(V) = 0)");
  const TreeNode& apex = t.node(u);
  double h = 0.0;
  for (NodeId c : apex.children) {
    const TreeNode& child = t.node(c);
    const double weight = variant == LocalEntropyVariant::kChildCut ? child.cut : apex.cut;
    h += detail::entropy_term(weight, vol, child.volume, apex.volume);
  }
  return h;
}

// An internal node with its children, and the quotient graph obtained by
// shrinking each child cluster to a point.
struct Triangle {
  NodeId apex = 0;
  std::vector<NodeId> children;  // increasing node id
  QuotientGraph local;
  double apex_volume = 0.0;
  double total_volume = 0.0;

  std::size_t size() const noexcept { return children.size(); }
};

inline Triangle make_triangle(const ClusterTree& t, const Graph& g, NodeId u) {
  if (t.is_leaf(u)) throw DomainError("triangle apex " + std::to_string(u) + " is a leaf");
  Triangle tri;
  tri.apex = u;
  auto kids = t.children(u);
  tri.children.assign(kids.begin(), kids.end());
  std::sort(tri.children.begin(), tri.children.end());
  std::vector<std::vector<Vertex>> clusters;
  clusters.reserve(tri.children.size());
  for (NodeId c : tri.children) clusters.push_back(t.leaves_under(c));
  tri.local = quotient(g, clusters);
  tri.apex_volume = t.node(u).volume;
  tri.total_volume = g.total_volume();
  return tri;
}

// Entropy saved by grouping two siblings with link weight `link` under a new
// node below their parent: 2 * link / vol(V) * log2(vol(parent) / (vol_a + vol_b)).
inline double merge_gain_value(double link, double vol_a, double vol_b, double vol_parent,
                               double vol_total) {
  if (link <= 0.0) return 0.0;
  // The ratio is >= 1 exactly; summation order can leave it a hair below.
  return 2.0 * link / vol_total * std::max(0.0, std::log2(vol_parent / (vol_a + vol_b)));
}

inline double merge_gain(const Triangle& tri, NodeId a, NodeId b) {
  auto index = [&](NodeId x) {
    auto it = std::lower_bound(tri.children.begin(), tri.children.end(), x);
    if (it == tri.children.end() || *it != x) {
      throw DomainError("merge_gain: node " + std::to_string(x) + " is not a child of the apex");
    }
    return static_cast<std::size_t>(it - tri.children.begin());
  };
  if (a == b) throw DomainError("merge_gain: a node cannot merge with itself");
  const std::size_t ia = index(a), ib = index(b);
  return merge_gain_value(tri.local.weight(ia, ib), tri.local.cluster_volume[ia],
                          tri.local.cluster_volume[ib], tri.apex_volume, tri.total_volume);
}

// Working tree of one triangle. Indices [0, num_clusters) are the original
// children, merge nodes follow in creation order, and the apex is last.
struct LocalTree {
  struct Node {
    double volume = 0.0;
    double cut = 0.0;
    double link = 0.0;  // total weight between this node's children
    int parent = -1;
    std::vector<int> children;
    bool alive = true;
  };

  std::vector<Node> nodes;
  std::size_t num_clusters = 0;
  int apex = -1;
  double total_volume = 0.0;

  std::vector<std::pair<int, int>> merges;
  std::vector<double> merge_gains;
  std::vector<int> contracted;
  std::vector<double> penalties;

  bool is_cluster(int id) const noexcept { return id < static_cast<int>(num_clusters); }
};

// Agglomerates the triangle's children into a binary tree hanging from the
// apex: ell - 1 merges, each taking the pair with the largest merge gain, ties
// to the lexicographically smallest pair of local ids. A single child gets a
// wrapper node so the apex always has exactly one child afterwards.
inline LocalTree stretch(const Triangle& tri) {
  const std::size_t ell = tri.size();
  if (ell == 0) throw DomainError("stretch: empty triangle");
  LocalTree lt;
  lt.num_clusters = ell;
  lt.total_volume = tri.total_volume;
  lt.nodes.resize(ell);
  for (std::size_t i = 0; i < ell; ++i) {
    lt.nodes[i].volume = tri.local.cluster_volume[i];
    lt.nodes[i].cut = tri.local.cluster_cut[i];
  }

  std::vector<std::unordered_map<int, double>> adj(ell);
  for (std::size_t i = 0; i < ell; ++i) {
    for (const auto& l : tri.local.adjacency[i]) adj[i].emplace(static_cast<int>(l.to), l.weight);
  }

  // Max-heap on gain, then min on (a, b).
  using Entry = std::tuple<double, int, int>;
  auto worse = [](const Entry& x, const Entry& y) {
    if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) < std::get<0>(y);
    if (std::get<1>(x) != std::get<1>(y)) return std::get<1>(x) > std::get<1>(y);
    return std::get<2>(x) > std::get<2>(y);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  auto gain = [&](int a, int b, double w) {
    return merge_gain_value(w, lt.nodes[a].volume, lt.nodes[b].volume, tri.apex_volume,
                            tri.total_volume);
  };
  for (std::size_t i = 0; i < ell; ++i) {
    for (const auto& l : tri.local.adjacency[i]) {
      if (l.to > i) {
        heap.emplace(gain(static_cast<int>(i), static_cast<int>(l.to), l.weight),
                     static_cast<int>(i), static_cast<int>(l.to));
      }
    }
  }
  std::set<int> alive;
  for (std::size_t i = 0; i < ell; ++i) alive.insert(static_cast<int>(i));

  for (std::size_t step = 0; step + 1 < ell; ++step) {
    while (!heap.empty() && !(lt.nodes[std::get<1>(heap.top())].alive &&
                              lt.nodes[std::get<2>(heap.top())].alive)) {
      heap.pop();
    }
    int a, b;
    double eta;
    if (!heap.empty() && std::get<0>(heap.top()) > 0.0) {
      std::tie(eta, a, b) = heap.top();
      heap.pop();
    } else {
      // Every sibling pair gains nothing; take the smallest ids.
      auto it = alive.begin();
      a = *it++;
      b = *it;
      auto found = adj[a].find(b);
      eta = found == adj[a].end() ? 0.0 : gain(a, b, found->second);
    }

    const int k = static_cast<int>(lt.nodes.size());
    LocalTree::Node merged;
    auto link_it = adj[a].find(b);
    merged.link = link_it == adj[a].end() ? 0.0 : link_it->second;
    merged.volume = lt.nodes[a].volume + lt.nodes[b].volume;
    merged.cut = std::max(0.0, lt.nodes[a].cut + lt.nodes[b].cut - 2.0 * merged.link);
    merged.children = {a, b};
    lt.nodes.push_back(std::move(merged));
    lt.nodes[a].parent = k;
    lt.nodes[b].parent = k;
    lt.nodes[a].alive = false;
    lt.nodes[b].alive = false;
    alive.erase(a);
    alive.erase(b);
    lt.merges.emplace_back(a, b);
    lt.merge_gains.push_back(eta);

    // Neighbour maps: the merged cluster inherits the larger one.
    adj[a].erase(b);
    adj[b].erase(a);
    const int big = adj[a].size() >= adj[b].size() ? a : b;
    const int small = big == a ? b : a;
    std::unordered_map<int, double> nbrs = std::move(adj[big]);
    for (const auto& [c, w] : adj[small]) {
      auto [it, inserted] = nbrs.emplace(c, w);
      if (!inserted) {
        // Sum in (a, b) order so the value does not depend on map sizes.
        it->second = big == a ? it->second + w : w + it->second;
      }
    }
    adj[a].clear();
    adj[b].clear();
    adj.emplace_back();
    for (const auto& [c, w] : nbrs) {
      adj[c].erase(a);
      adj[c].erase(b);
      adj[c][k] = w;
      heap.emplace(gain(c, k, w), c, k);
    }
    adj[k] = std::move(nbrs);
    alive.insert(k);
  }

  int top = *alive.begin();
  if (ell == 1) {
    LocalTree::Node wrapper;
    wrapper.volume = lt.nodes[0].volume;
    wrapper.cut = lt.nodes[0].cut;
    wrapper.children = {0};
    lt.nodes.push_back(std::move(wrapper));
    top = static_cast<int>(lt.nodes.size()) - 1;
    lt.nodes[0].parent = top;
    lt.nodes[0].alive = false;
  }
  LocalTree::Node apex;
  apex.volume = tri.apex_volume;
  apex.cut = 0.0;
  apex.children = {top};
  lt.nodes.push_back(std::move(apex));
  lt.apex = static_cast<int>(lt.nodes.size()) - 1;
  lt.nodes[top].parent = lt.apex;
  for (auto& nd : lt.nodes) nd.alive = true;
  return lt;
}

// Entropy added by contracting internal node v into its parent:
// 2 * link(v) / vol(V) * log2(vol(parent) / vol(v)).
inline double compress_penalty(const LocalTree& lt, int v) {
  if (v < 0 || v >= static_cast<int>(lt.nodes.size()) || !lt.nodes[v].alive) {
    throw DomainError("compress_penalty: no such node");
  }
  if (v == lt.apex) throw DomainError("compress_penalty: the apex has no parent edge");
  if (lt.is_cluster(v)) throw DomainError("compress_penalty: node is a leaf of the triangle");
  const auto& nd = lt.nodes[v];
  if (nd.link <= 0.0) return 0.0;
  return 2.0 * nd.link / lt.total_volume *
         std::max(0.0, std::log2(lt.nodes[nd.parent].volume / nd.volume));
}

namespace detail {

inline void local_depths_heights(const LocalTree& lt, std::vector<int>& depth,
                                 std::vector<int>& height) {
  depth.assign(lt.nodes.size(), 0);
  height.assign(lt.nodes.size(), 0);
  std::vector<int> order{lt.apex};
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (int c : lt.nodes[order[i]].children) {
      depth[c] = depth[order[i]] + 1;
      order.push_back(c);
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int p = lt.nodes[*it].parent;
    if (*it != lt.apex) height[p] = std::max(height[p], height[*it] + 1);
  }
}

}  // namespace detail

// Contracts the cheapest edge lying on an apex-to-leaf path longer than two
// (ties: smallest node id) until the local tree has height at most two.
inline void compress(LocalTree& lt) {
  std::vector<int> depth, height;
  while (true) {
    detail::local_depths_heights(lt, depth, height);
    if (height[lt.apex] <= 2) break;
    int best = -1;
    double best_penalty = std::numeric_limits<double>::infinity();
    for (int v = static_cast<int>(lt.num_clusters); v < lt.apex; ++v) {
      if (!lt.nodes[v].alive || depth[v] + height[v] <= 2) continue;
      const double p = compress_penalty(lt, v);
      if (p < best_penalty) {
        best_penalty = p;
        best = v;
      }
    }
    auto& node = lt.nodes[best];
    const int parent = node.parent;
    auto& siblings = lt.nodes[parent].children;
    std::vector<int> merged;
    merged.reserve(siblings.size() + node.children.size());
    for (int c : siblings) {
      if (c == best) {
        for (int gc : node.children) {
          merged.push_back(gc);
          lt.nodes[gc].parent = parent;
        }
      } else {
        merged.push_back(c);
      }
    }
    siblings = std::move(merged);
    lt.nodes[parent].link += node.link;
    node.children.clear();
    node.alive = false;
    lt.contracted.push_back(best);
    lt.penalties.push_back(best_penalty);
  }
}

// Groups of original children formed by the apex's children after compress;
// a child sitting directly under the apex forms a singleton group.
inline std::vector<std::vector<int>> top_level_groups(const LocalTree& lt) {
  std::vector<std::vector<int>> groups;
  for (int c : lt.nodes[lt.apex].children) {
    if (lt.is_cluster(c)) {
      groups.push_back({c});
      continue;
    }
    std::vector<int> members;
    for (int gc : lt.nodes[c].children) {
      if (!lt.is_cluster(gc)) throw IntegrityError("local tree deeper than two levels");
      members.push_back(gc);
    }
    std::sort(members.begin(), members.end());
    groups.push_back(std::move(members));
  }
  std::sort(groups.begin(), groups.end());
  return groups;
}

struct TrialValidation {
  double max_merge_gain_error = 0.0;
  double max_penalty_error = 0.0;
  double delta_error = 0.0;
};

struct TrialResult {
  NodeId apex = 0;
  double delta_h = 0.0;        // entropy saved by the staged level, >= 0
  double local_entropy = 0.0;  // H(apex)
  std::vector<std::vector<NodeId>> groups;  // children under each new node
  std::vector<double> merge_gains;
  std::vector<double> penalties;
  std::optional<TrialValidation> validation;

  double sparsity() const noexcept { return local_entropy > 0.0 ? delta_h / local_entropy : 0.0; }
};

namespace detail {

// Replays a trial on a copy of the full tree and measures every closed-form
// quantity against the brute-force entropy difference.
inline TrialValidation validate_trial(const ClusterTree& t, const Graph& g, const Triangle& tri,
                                      const LocalTree& lt, double delta_h) {
  TrialValidation v;
  ClusterTree copy = t;
  std::vector<NodeId> map(lt.nodes.size(), ClusterTree::kNoNode);
  for (std::size_t i = 0; i < lt.num_clusters; ++i) map[i] = tri.children[i];
  map[lt.apex] = tri.apex;
  const double start = structural_entropy(g, copy);

  double h = start;
  int next = static_cast<int>(lt.num_clusters);
  for (std::size_t s = 0; s < lt.merges.size(); ++s, ++next) {
    const auto [a, b] = lt.merges[s];
    const NodeId members[2] = {map[a], map[b]};
    map[next] = copy.group_children(g, tri.apex, members);
    const double after = structural_entropy(g, copy);
    v.max_merge_gain_error =
        std::max(v.max_merge_gain_error, std::abs((h - after) - lt.merge_gains[s]));
    h = after;
  }
  if (lt.num_clusters == 1) {
    const NodeId only[1] = {map[0]};
    map[next] = copy.group_children(g, tri.apex, only);
  }
  for (std::size_t s = 0; s < lt.contracted.size(); ++s) {
    copy.contract(map[lt.contracted[s]]);
    const double after = structural_entropy(g, copy);
    v.max_penalty_error = std::max(v.max_penalty_error, std::abs((after - h) - lt.penalties[s]));
    h = after;
  }
  for (int c : lt.nodes[lt.apex].children) {
    if (lt.is_cluster(c)) {
      const NodeId only[1] = {map[c]};
      copy.group_children(g, tri.apex, only);
    }
  }
  v.delta_error = std::abs((start - structural_entropy(g, copy)) - delta_h);
  return v;
}

}  // namespace detail

// Stretch and compress on a copy of the u-triangle. The tree is not touched.
inline TrialResult trial_stratify(const ClusterTree& t, const Graph& g, NodeId u,
                                  const HcseOptions& opts = {}) {
  TrialResult r;
  r.apex = u;
  r.local_entropy = local_entropy(t, g, u, opts.variant);
  Triangle tri = make_triangle(t, g, u);
  LocalTree lt = stretch(tri);
  compress(lt);

  // The staged level saves 2 * link / vol(V) * log2(vol(u) / vol(group)) per
  // group, which is never negative.
  double saved = 0.0;
  for (const auto& grp : top_level_groups(lt)) {
    std::vector<NodeId> ids;
    ids.reserve(grp.size());
    for (int c : grp) ids.push_back(tri.children[c]);
    r.groups.push_back(std::move(ids));
  }
  for (int c : lt.nodes[lt.apex].children) {
    if (!lt.is_cluster(c)) {
      const auto& nd = lt.nodes[c];
      saved += merge_gain_value(nd.link, nd.volume, 0.0, tri.apex_volume, tri.total_volume);
    }
  }
  r.delta_h = std::max(0.0, saved);
  r.merge_gains = lt.merge_gains;
  r.penalties = lt.penalties;
  if (opts.validate) r.validation = detail::validate_trial(t, g, tri, lt, r.delta_h);
  return r;
}

struct RoundRecord {
  std::size_t t = 0;            // 1-based round index
  double delta_h = 0.0;         // entropy saved by the round
  std::size_t chosen_level = 0;
  std::vector<double> level_sparsities;
};

struct ValidationStats {
  std::size_t trials = 0;
  double min_trial_delta = std::numeric_limits<double>::infinity();
  double min_merge_gain = std::numeric_limits<double>::infinity();
  double min_penalty = std::numeric_limits<double>::infinity();
  double max_merge_gain_error = 0.0;
  double max_penalty_error = 0.0;
  double max_trial_delta_error = 0.0;
  double max_round_delta_error = 0.0;
};

struct StratificationTrace {
  std::vector<RoundRecord> rounds;
  std::optional<ValidationStats> validation;

  // delta_t - delta_{t-1}, defined for 2 <= t <= rounds.size().
  double second_difference(std::size_t t) const {
    if (t < 2 || t > rounds.size()) throw DomainError("second difference undefined at t");
    return rounds[t - 1].delta_h - rounds[t - 2].delta_h;
  }
};

// Trace CSV: t,delta_H,second_difference,chosen_level (second_difference is
// empty for t = 1).
inline std::string trace_csv(const StratificationTrace& trace) {
  std::ostringstream out;
  out << "t,delta_H,second_difference,chosen_level\n";
  for (const auto& r : trace.rounds) {
    out << r.t << ',' << format_real(r.delta_h) << ',';
    if (r.t >= 2) out << format_real(trace.second_difference(r.t));
    out << ',' << r.chosen_level << '\n';
  }
  return out.str();
}

// Long format: one row per (round, level) with that level's mean sparsity
// before the round was applied.
inline std::string sparsity_csv(const StratificationTrace& trace) {
  std::ostringstream out;
  out << "t,level,sparsity\n";
  for (const auto& r : trace.rounds) {
    for (std::size_t j = 0; j < r.level_sparsities.size(); ++j) {
      out << r.t << ',' << j << ',' << format_real(r.level_sparsities[j]) << '\n';
    }
  }
  return out.str();
}

struct LevelSparsity {
  double mean = 0.0;
  std::vector<std::pair<NodeId, double>> per_node;
};

// Owns a tree under construction and the trial results of its triangles.
// Trials are cached per apex and dropped when the apex gains a new level.
class Stratifier {
 public:
  Stratifier(const Graph& g, ClusterTree tree, HcseOptions opts = {})
      : graph_(&g), tree_(std::move(tree)), opts_(opts) {
    if (!(g.total_volume() > 0.0)) throw DomainError("graph has no edges (vol(V) = 0)");
    if (opts_.validate) trace_.validation.emplace();
  }

  const ClusterTree& tree() const noexcept { return tree_; }
  const StratificationTrace& trace() const noexcept { return trace_; }
  std::size_t height() const { return tree_.height(); }

  const TrialResult& trial(NodeId u) {
    auto it = cache_.find(u);
    if (it == cache_.end()) {
      it = cache_.emplace(u, trial_stratify(tree_, *graph_, u, opts_)).first;
      record(it->second);
    }
    return it->second;
  }

  LevelSparsity level_sparsity(std::size_t j) {
    auto lv = levels(tree_);
    if (j >= lv.size()) throw DomainError("level " + std::to_string(j) + " does not exist");
    return sparsity_of(lv[j]);
  }

  struct RoundResult {
    bool applied = false;
    double delta_h = 0.0;
    std::size_t level = 0;
    std::vector<double> level_sparsities;
  };

  // One stratification round at the sparsest level (ties: smallest level).
  // Nothing changes when no level has positive sparsity.
  RoundResult stratify_once() {
    RoundResult res;
    const auto lv = levels(tree_);
    double best = 0.0;
    for (std::size_t j = 0; j < lv.size(); ++j) {
      const double s = sparsity_of(lv[j]).mean;
      res.level_sparsities.push_back(s);
      if (s > best) {
        best = s;
        res.level = j;
      }
    }
    if (!(best > 0.0)) return res;

    const double before = opts_.validate ? structural_entropy(*graph_, tree_) : 0.0;
    std::vector<std::uint32_t> mark(graph_->num_vertices(), 0);
    std::uint32_t stamp = 0;
    for (NodeId u : lv[res.level]) {
      const TrialResult& tr = trial(u);
      std::vector<std::vector<NodeId>> groups;
      if (tr.delta_h > 0.0) {
        groups = tr.groups;
        res.delta_h += tr.delta_h;
      } else {
        auto kids = tree_.children(u);
        groups.emplace_back(kids.begin(), kids.end());
      }
      for (const auto& members : groups) {
        std::vector<Vertex> verts;
        for (NodeId m : members) {
          auto part = tree_.leaves_under(m);
          verts.insert(verts.end(), part.begin(), part.end());
        }
        const double cut = cut_of_vertex_set(*graph_, verts, mark, ++stamp);
        tree_.group_children(u, members, cut);
      }
      cache_.erase(u);
    }
    res.applied = true;

    if (opts_.validate) {
      auto& v = *trace_.validation;
      const double after = structural_entropy(*graph_, tree_);
      v.max_round_delta_error = std::max(v.max_round_delta_error, std::abs((before - after) - res.delta_h));
    }
    trace_.rounds.push_back({trace_.rounds.size() + 1, res.delta_h, res.level, res.level_sparsities});
    return res;
  }

 private:
  LevelSparsity sparsity_of(const std::vector<NodeId>& level) {
    LevelSparsity ls;
    double sum = 0.0;
    for (NodeId u : level) {
      const double s = trial(u).sparsity();
      ls.per_node.emplace_back(u, s);
      sum += s;
    }
    ls.mean = level.empty() ? 0.0 : sum / static_cast<double>(level.size());
    return ls;
  }

  void record(const TrialResult& tr) {
    if (!trace_.validation) return;
    auto& v = *trace_.validation;
    ++v.trials;
    v.min_trial_delta = std::min(v.min_trial_delta, tr.delta_h);
    for (double x : tr.merge_gains) v.min_merge_gain = std::min(v.min_merge_gain, x);
    for (double x : tr.penalties) v.min_penalty = std::min(v.min_penalty, x);
    if (tr.validation) {
      v.max_merge_gain_error = std::max(v.max_merge_gain_error, tr.validation->max_merge_gain_error);
      v.max_penalty_error = std::max(v.max_penalty_error, tr.validation->max_penalty_error);
      v.max_trial_delta_error = std::max(v.max_trial_delta_error, tr.validation->delta_error);
    }
  }

  const Graph* graph_;
  ClusterTree tree_;
  HcseOptions opts_;
  std::map<NodeId, TrialResult> cache_;
  StratificationTrace trace_;
};

inline LevelSparsity level_sparsity(const ClusterTree& t, const Graph& g, std::size_t j,
                                    const HcseOptions& opts = {}) {
  Stratifier s(g, t, opts);
  return s.level_sparsity(j);
}

struct StratifyOnceResult {
  ClusterTree tree;
  double delta_h = 0.0;
  std::size_t level = 0;
  bool applied = false;
};

inline StratifyOnceResult stratify_once(const ClusterTree& t, const Graph& g,
                                        const HcseOptions& opts = {}) {
  Stratifier s(g, t, opts);
  auto r = s.stratify_once();
  return {s.tree(), r.delta_h, r.level, r.applied};
}

struct HcseResult {
  ClusterTree tree;
  StratificationTrace trace;
  std::vector<std::string> warnings;
};

// Stratifies the trivial tree until it has k levels or no level can be
// improved.
inline HcseResult k_hcse(const Graph& g, std::size_t k, const HcseOptions& opts = {}) {
  if (k == 0) throw DomainError("k must be at least 1");
  HcseResult out;
  const std::size_t limit = g.num_vertices() > 2 ? g.num_vertices() - 1 : 1;
  if (k > limit) {
    out.warnings.push_back("k = " + std::to_string(k) + " exceeds n - 1; clamped to " +
                           std::to_string(limit));
    k = limit;
  }
  if (!(g.total_volume() > 0.0)) {
    out.tree = trivial_tree(g);
    out.warnings.push_back("graph has no edges; returning the trivial tree");
    return out;
  }
  Stratifier s(g, trivial_tree(g), opts);
  while (s.height() < k) {
    if (!s.stratify_once().applied) break;
  }
  out.tree = s.tree();
  out.trace = s.trace();
  return out;
}

struct AutoResult {
  ClusterTree tree;
  StratificationTrace trace;
  std::size_t chosen_height = 0;
  bool inflection_found = false;  // false: fallback to argmax or early stop
  bool stopped_early = false;     // no level could be improved any more
  std::vector<std::string> warnings;
};

// Least t with D_t >= D_{t-1} and D_t >= D_{t+1}, where D_t = delta_t -
// delta_{t-1} and delta[0] holds delta_1. Needs delta_{t+1}, so only
// t <= delta.size() - 1 is examined.
inline std::optional<std::size_t> first_inflection(std::span<const double> delta,
                                                   InflectionBoundary boundary) {
  auto d = [&](std::size_t t) { return delta[t - 1] - delta[t - 2]; };
  const std::size_t first = boundary == InflectionBoundary::kAllowTwo ? 2 : 3;
  for (std::size_t t = first; t + 1 <= delta.size(); ++t) {
    const double left = t == 2 ? d(2) : d(t - 1);
    if (d(t) >= left && d(t) >= d(t + 1)) return t;
  }
  return std::nullopt;
}

// Height selection by the first inflection of the per-round savings. Rounds
// are computed one ahead of the candidate t.
inline AutoResult hcse_auto(const Graph& g, std::size_t max_rounds = 12,
                            const HcseOptions& opts = {}) {
  if (max_rounds < 3) throw DomainError("max_rounds must be at least 3");
  AutoResult out;
  if (!(g.total_volume() > 0.0)) {
    out.tree = trivial_tree(g);
    out.chosen_height = 1;
    out.stopped_early = true;
    out.warnings.push_back("graph has no edges; returning the trivial tree");
    return out;
  }
  Stratifier s(g, trivial_tree(g), opts);
  std::vector<ClusterTree> by_height{ClusterTree{}, s.tree()};  // by_height[h]
  std::vector<double> delta;                                    // delta[t - 1]

  for (std::size_t round = 1; round <= max_rounds; ++round) {
    auto r = s.stratify_once();
    if (!r.applied) {
      out.stopped_early = true;
      break;
    }
    delta.push_back(r.delta_h);
    by_height.push_back(s.tree());
    if (auto t = first_inflection(delta, opts.boundary)) {
      out.chosen_height = *t;
      out.inflection_found = true;
      break;
    }
  }

  if (!out.inflection_found) {
    if (out.stopped_early) {
      out.chosen_height = s.height();
    } else {
      std::size_t best = 2;
      for (std::size_t t = 3; t <= delta.size(); ++t) {
        if (delta[t - 1] - delta[t - 2] > delta[best - 1] - delta[best - 2]) best = t;
      }
      out.chosen_height = best;
      out.warnings.push_back("no inflection within " + std::to_string(max_rounds) +
                             " rounds; using the largest second difference at t = " +
                             std::to_string(best));
    }
  }
  out.tree = by_height.at(out.chosen_height);
  out.trace = s.trace();
  return out;
}

}  // namespace hcse
