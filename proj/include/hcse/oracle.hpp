#pragma once

// Exhaustive enumeration of cluster trees over small labelled vertex sets,
// used as ground truth for the cost functionals. No pruning: the point is to
// be obviously correct.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "hcse/cluster_tree.hpp"
#include "hcse/errors.hpp"
#include "hcse/graph.hpp"

namespace hcse {

enum class TreeMode { kBinary, kMultifurcating };

inline constexpr std::size_t kMaxBinaryLeaves = 9;
inline constexpr std::size_t kMaxMultifurcatingLeaves = 7;

// Nested tree over vertex ids; a node with `leaf >= 0` is a leaf.
struct TreeShape {
  int leaf = -1;
  std::vector<TreeShape> children;
};

inline ClusterTree build_tree(const TreeShape& shape, const Graph& g) {
  ClusterTree t(g.num_vertices());
  if (shape.leaf >= 0) {
    t.add_leaf(t.root(), static_cast<Vertex>(shape.leaf));
  } else {
    auto fill = [&](auto&& self, const TreeShape& s, NodeId at) -> void {
      for (const auto& c : s.children) {
        if (c.leaf >= 0) {
          t.add_leaf(at, static_cast<Vertex>(c.leaf));
        } else {
          self(self, c, t.add_internal(at));
        }
      }
    };
    fill(fill, shape, t.root());
  }
  t.recompute_caches(g);
  return t;
}

namespace detail {

inline void check_bound(std::size_t n, TreeMode mode) {
  if (n == 0) throw DomainError("enumerate_trees: need at least one leaf");
  const std::size_t bound = mode == TreeMode::kBinary ? kMaxBinaryLeaves : kMaxMultifurcatingLeaves;
  if (n > bound) {
    throw DomainError("enumerate_trees: n = " + std::to_string(n) + " exceeds the limit of " +
                      std::to_string(bound) +
                      (mode == TreeMode::kBinary ? " for binary trees ((2n-3)!! grows too fast)"
                                                 : " for multifurcating trees; use binary mode"));
  }
}

// Binary trees by leaf insertion: leaf k is attached above each of the
// 2k - 1 nodes of a tree on k leaves.
struct InsertionTree {
  std::vector<int> parent, left, right;  // leaves are 0..n-1
  int root = -1;

  TreeShape shape(int x) const {
    TreeShape s;
    if (left[x] < 0) {
      s.leaf = x;
    } else {
      s.children.push_back(shape(left[x]));
      s.children.push_back(shape(right[x]));
    }
    return s;
  }
};

inline void insert_leaves(InsertionTree& t, int next, int n, const std::function<void(const TreeShape&)>& emit) {
  if (next == n) {
    emit(t.shape(t.root));
    return;
  }
  const int existing = static_cast<int>(t.parent.size());
  for (int x = 0; x < existing; ++x) {
    if (x >= next && x < n) continue;  // leaf not placed yet
    const int y = static_cast<int>(t.parent.size());
    const int p = t.parent[x];
    t.parent.push_back(p);
    t.left.push_back(x);
    t.right.push_back(next);
    t.parent[x] = y;
    t.parent[next] = y;
    if (p < 0) {
      t.root = y;
    } else if (t.left[p] == x) {
      t.left[p] = y;
    } else {
      t.right[p] = y;
    }

    insert_leaves(t, next + 1, n, emit);

    if (p < 0) {
      t.root = x;
    } else if (t.left[p] == y) {
      t.left[p] = x;
    } else {
      t.right[p] = x;
    }
    t.parent[x] = p;
    t.parent[next] = -1;
    t.parent.pop_back();
    t.left.pop_back();
    t.right.pop_back();
  }
}

// Every rooted tree over `items` with no unary internal node.
inline void all_trees(const std::vector<int>& items, const std::function<void(const TreeShape&)>& emit);

// Set partitions of `items` into at least two blocks, as restricted growth
// strings; `binary` keeps exactly two blocks.
inline void for_each_split(const std::vector<int>& items, bool binary,
                           const std::function<void(const std::vector<std::vector<int>>&)>& emit) {
  const std::size_t m = items.size();
  std::vector<std::size_t> rgs(m, 0);
  auto rec = [&](auto&& self, std::size_t i, std::size_t blocks) -> void {
    if (i == m) {
      if (blocks < 2 || (binary && blocks != 2)) return;
      std::vector<std::vector<int>> parts(blocks);
      for (std::size_t k = 0; k < m; ++k) parts[rgs[k]].push_back(items[k]);
      emit(parts);
      return;
    }
    const std::size_t limit = binary ? std::min<std::size_t>(blocks + 1, 2) : blocks + 1;
    for (std::size_t b = 0; b < limit; ++b) {
      rgs[i] = b;
      self(self, i + 1, std::max(blocks, b + 1));
    }
  };
  rgs[0] = 0;
  rec(rec, 1, 1);
}

inline void all_trees(const std::vector<int>& items, const std::function<void(const TreeShape&)>& emit) {
  if (items.size() == 1) {
    TreeShape leaf;
    leaf.leaf = items[0];
    emit(leaf);
    return;
  }
  for_each_split(items, false, [&](const std::vector<std::vector<int>>& parts) {
    TreeShape node;
    node.children.resize(parts.size());
    auto product = [&](auto&& self, std::size_t i) -> void {
      if (i == parts.size()) {
        emit(node);
        return;
      }
      all_trees(parts[i], [&](const TreeShape& sub) {
        node.children[i] = sub;
        self(self, i + 1);
      });
    };
    product(product, 0);
  });
}

}  // namespace detail

// Streams every tree shape on leaves {0, ..., n-1} exactly once.
inline void enumerate_shapes(std::size_t n, TreeMode mode,
                             const std::function<void(const TreeShape&)>& emit) {
  detail::check_bound(n, mode);
  if (n == 1) {
    TreeShape only;
    only.children.push_back(TreeShape{0, {}});
    emit(only);
    return;
  }
  if (mode == TreeMode::kBinary) {
    detail::InsertionTree t;
    const int leaves = static_cast<int>(n);
    t.parent.assign(n, -1);
    t.left.assign(n, -1);
    t.right.assign(n, -1);
    // Root over leaves 0 and 1.
    t.parent.push_back(-1);
    t.left.push_back(0);
    t.right.push_back(1);
    t.parent[0] = t.parent[1] = leaves;
    t.root = leaves;
    detail::insert_leaves(t, 2, leaves, emit);
  } else {
    std::vector<int> items(n);
    for (std::size_t i = 0; i < n; ++i) items[i] = static_cast<int>(i);
    detail::all_trees(items, emit);
  }
}

// Streams every tree over the vertices of `g`, caches computed against `g`.
inline void enumerate_trees(const Graph& g, TreeMode mode,
                            const std::function<void(const ClusterTree&)>& emit) {
  enumerate_shapes(g.num_vertices(), mode,
                   [&](const TreeShape& s) { emit(build_tree(s, g)); });
}

inline std::size_t count_trees(std::size_t n, TreeMode mode) {
  std::size_t count = 0;
  enumerate_shapes(n, mode, [&](const TreeShape&) { ++count; });
  return count;
}

using CostFunctional = std::function<double(const Graph&, const ClusterTree&)>;

struct BruteMinResult {
  double min_value = std::numeric_limits<double>::infinity();
  std::vector<ClusterTree> argmin;
  std::size_t trees_seen = 0;
};

inline constexpr double kArgminTolerance = 1e-9;

// Exact minimum of `cost` over all trees, and every tree within
// kArgminTolerance (relative to max(1, |min|)) of it.
inline BruteMinResult brute_min(const Graph& g, const CostFunctional& cost, TreeMode mode) {
  BruteMinResult out;
  std::vector<std::pair<double, ClusterTree>> candidates;
  auto slack = [](double m) { return kArgminTolerance * std::max(1.0, std::abs(m)); };
  enumerate_trees(g, mode, [&](const ClusterTree& t) {
    ++out.trees_seen;
    const double c = cost(g, t);
    if (c < out.min_value) {
      out.min_value = c;
      std::erase_if(candidates, [&](const auto& e) { return e.first > c + slack(c); });
    }
    if (c <= out.min_value + slack(out.min_value)) candidates.emplace_back(c, t);
  });
  for (auto& [c, t] : candidates) {
    if (c <= out.min_value + slack(out.min_value)) out.argmin.push_back(std::move(t));
  }
  return out;
}

// Sum over internal nodes N with child leaf sets A, B of |A| * |B| * log2(|A| + |B|).
inline double gamma_cost(const ClusterTree& t) {
  double total = 0.0;
  for (NodeId id : t.internal_nodes()) {
    const auto kids = t.children(id);
    if (kids.size() == 1 && id == t.root() && t.is_leaf(kids[0])) continue;
    if (kids.size() != 2) {
      throw DomainError("gamma_cost: node " + std::to_string(id) + " is not binary");
    }
    const double a = static_cast<double>(t.node(kids[0]).size);
    const double b = static_cast<double>(t.node(kids[1]).size);
    total += a * b * std::log2(a + b);
  }
  return total;
}

// Binary everywhere, and every split is into floor(k/2) and ceil(k/2) leaves.
inline bool is_balanced_binary(const ClusterTree& t) {
  for (NodeId id : t.internal_nodes()) {
    const auto kids = t.children(id);
    if (kids.size() == 1 && id == t.root() && t.is_leaf(kids[0])) continue;
    if (kids.size() != 2) return false;
    const std::size_t a = t.node(kids[0]).size, b = t.node(kids[1]).size;
    if ((a > b ? a - b : b - a) > 1) return false;
  }
  return true;
}

// Leaf counts of the root's children, ascending.
inline std::vector<std::size_t> root_split(const ClusterTree& t) {
  std::vector<std::size_t> sizes;
  for (NodeId c : t.children(t.root())) sizes.push_back(t.node(c).size);
  std::sort(sizes.begin(), sizes.end());
  return sizes;
}

}  // namespace hcse
