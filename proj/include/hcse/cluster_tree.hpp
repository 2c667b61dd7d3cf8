#pragma once

// Rooted cluster trees over the vertices of a Graph.
//
// Nodes live in an arena and keep their id for the lifetime of the tree;
// contracted nodes are marked dead rather than erased. Internal nodes do not
// store vertex sets, membership is the set of leaf descendants. Every node
// caches its volume, cut weight (total weight of edges with exactly one
// endpoint inside), leaf count and depth. The root is its own parent.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hcse/errors.hpp"
#include "hcse/graph.hpp"

namespace hcse {

using NodeId = std::uint32_t;

struct TreeNode {
  static constexpr std::int64_t kInternal = -1;

  NodeId parent = 0;
  std::vector<NodeId> children;
  double volume = 0.0;
  double cut = 0.0;
  std::size_t size = 0;  // number of leaf descendants
  std::uint32_t depth = 0;
  std::int64_t vertex = kInternal;
  bool alive = true;
  std::string name;

  bool is_leaf() const noexcept { return vertex != kInternal; }
};

// Sum of edge weights leaving `members`. `mark` is caller-owned scratch of
// size num_vertices, every entry different from `stamp` on entry.
inline double cut_of_vertex_set(const Graph& g, std::span<const Vertex> members,
                                std::vector<std::uint32_t>& mark, std::uint32_t stamp) {
  for (Vertex x : members) mark[x] = stamp;
  double cut = 0.0;
  for (Vertex x : members) {
    for (const auto& nb : g.neighbors(x)) {
      if (mark[nb.to] != stamp) cut += nb.weight;
    }
  }
  return cut;
}

class ClusterTree {
 public:
  ClusterTree() = default;

  // A lone root over `num_vertices` vertices, to be filled with add_internal
  // and add_leaf and finished with recompute_caches.
  explicit ClusterTree(std::size_t num_vertices)
      : leaf_of_vertex_(num_vertices, kNoNode) {
    nodes_.emplace_back();
    nodes_.back().parent = 0;
  }

  static constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

  NodeId root() const noexcept { return 0; }
  std::size_t arena_size() const noexcept { return nodes_.size(); }
  std::size_t num_vertices() const noexcept { return leaf_of_vertex_.size(); }
  const TreeNode& node(NodeId id) const { return nodes_.at(id); }
  std::span<const NodeId> children(NodeId id) const { return nodes_.at(id).children; }
  NodeId parent(NodeId id) const { return nodes_.at(id).parent; }
  bool is_leaf(NodeId id) const { return nodes_.at(id).is_leaf(); }

  NodeId leaf_of(Vertex v) const {
    if (v >= leaf_of_vertex_.size()) throw DomainError("vertex id out of range");
    NodeId id = leaf_of_vertex_[v];
    if (id == kNoNode) throw DomainError("vertex " + std::to_string(v) + " has no leaf");
    return id;
  }

  void set_name(NodeId id, std::string name) { nodes_.at(id).name = std::move(name); }

  NodeId add_internal(NodeId parent) {
    require_internal(parent);
    NodeId id = append_node(parent);
    nodes_[parent].children.push_back(id);
    return id;
  }

  NodeId add_leaf(NodeId parent, Vertex v) {
    require_internal(parent);
    if (v >= leaf_of_vertex_.size()) throw DomainError("vertex id out of range");
    if (leaf_of_vertex_[v] != kNoNode) {
      throw DomainError("vertex " + std::to_string(v) + " already has a leaf");
    }
    NodeId id = append_node(parent);
    nodes_[id].vertex = v;
    nodes_[parent].children.push_back(id);
    leaf_of_vertex_[v] = id;
    return id;
  }

  // Alive ids in increasing order.
  std::vector<NodeId> alive_nodes() const {
    std::vector<NodeId> out;
    for (NodeId i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].alive) out.push_back(i);
    }
    return out;
  }

  std::vector<NodeId> internal_nodes() const {
    std::vector<NodeId> out;
    for (NodeId i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].alive && !nodes_[i].is_leaf()) out.push_back(i);
    }
    return out;
  }

  // Vertices below `id`, in depth-first order.
  std::vector<Vertex> leaves_under(NodeId id) const {
    std::vector<Vertex> out;
    std::vector<NodeId> stack{id};
    while (!stack.empty()) {
      NodeId x = stack.back();
      stack.pop_back();
      const auto& nd = nodes_.at(x);
      if (nd.is_leaf()) {
        out.push_back(static_cast<Vertex>(nd.vertex));
      } else {
        for (auto it = nd.children.rbegin(); it != nd.children.rend(); ++it) stack.push_back(*it);
      }
    }
    return out;
  }

  // Maximum leaf depth.
  std::uint32_t height() const {
    std::uint32_t h = 0;
    for (NodeId leaf : leaf_of_vertex_) {
      if (leaf != kNoNode) h = std::max(h, nodes_[leaf].depth);
    }
    return h;
  }

  NodeId lca(Vertex u, Vertex v) const {
    if (u == v) throw DomainError("lca needs two distinct vertices");
    NodeId a = leaf_of(u);
    NodeId b = leaf_of(v);
    while (nodes_[a].depth > nodes_[b].depth) a = nodes_[a].parent;
    while (nodes_[b].depth > nodes_[a].depth) b = nodes_[b].parent;
    while (a != b) {
      a = nodes_[a].parent;
      b = nodes_[b].parent;
    }
    return a;
  }

  // Inserts a new node under `parent` that adopts `members` (all current
  // children of `parent`). The new node takes the position of the first
  // member. Volume, size and depth are maintained; `cut` is supplied by the
  // caller, who usually knows it in closed form.
  NodeId group_children(NodeId parent, std::span<const NodeId> members, double cut) {
    require_internal(parent);
    if (members.empty()) throw DomainError("group_children: no members");
    std::vector<NodeId> sorted(members.begin(), members.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw DomainError("group_children: repeated member");
    }
    for (NodeId m : sorted) {
      if (m >= nodes_.size() || !nodes_[m].alive || nodes_[m].parent != parent || m == parent) {
        throw DomainError("group_children: node " + std::to_string(m) + " is not a child");
      }
    }
    auto chosen = [&](NodeId c) { return std::binary_search(sorted.begin(), sorted.end(), c); };

    NodeId gid = append_node(parent);
    nodes_[gid].cut = cut;

    std::vector<NodeId> kept;
    kept.reserve(nodes_[parent].children.size() - members.size() + 1);
    bool placed = false;
    for (NodeId c : nodes_[parent].children) {
      if (chosen(c)) {
        if (!placed) {
          kept.push_back(gid);
          placed = true;
        }
        continue;
      }
      kept.push_back(c);
    }
    nodes_[parent].children = std::move(kept);

    for (NodeId m : members) {
      nodes_[gid].children.push_back(m);
      nodes_[m].parent = gid;
      nodes_[gid].volume += nodes_[m].volume;
      nodes_[gid].size += nodes_[m].size;
    }
    refresh_depth(gid);
    return gid;
  }

  // Same as above, computing the cut of the new node from the graph.
  NodeId group_children(const Graph& g, NodeId parent, std::span<const NodeId> members) {
    std::vector<Vertex> verts;
    for (NodeId m : members) {
      auto part = leaves_under(m);
      verts.insert(verts.end(), part.begin(), part.end());
    }
    std::vector<std::uint32_t> mark(g.num_vertices(), 0);
    return group_children(parent, members, cut_of_vertex_set(g, verts, mark, 1));
  }

  // Removes internal non-root node `v`; its children move to v's parent in
  // v's position. Ancestors' caches do not change.
  void contract(NodeId v) {
    if (v >= nodes_.size() || !nodes_[v].alive) throw DomainError("contract: no such node");
    if (v == root()) throw DomainError("contract: cannot contract the root");
    if (nodes_[v].is_leaf()) throw DomainError("contract: node is a leaf");
    NodeId p = nodes_[v].parent;
    std::vector<NodeId> merged;
    for (NodeId c : nodes_[p].children) {
      if (c == v) {
        for (NodeId gc : nodes_[v].children) {
          merged.push_back(gc);
          nodes_[gc].parent = p;
        }
      } else {
        merged.push_back(c);
      }
    }
    nodes_[p].children = std::move(merged);
    for (NodeId gc : nodes_[v].children) refresh_depth(gc);
    nodes_[v].children.clear();
    nodes_[v].alive = false;
  }

  // Recomputes depth, size, volume and cut for every alive node from the
  // graph, validating the topology on the way.
  void recompute_caches(const Graph& g) {
    if (g.num_vertices() != leaf_of_vertex_.size()) {
      throw DomainError("tree has " + std::to_string(leaf_of_vertex_.size()) +
                        " vertex slots but the graph has " + std::to_string(g.num_vertices()));
    }
    validate_topology();

    // Pre-order from the root: depths and a processing order.
    std::vector<NodeId> order;
    order.reserve(nodes_.size());
    order.push_back(root());
    nodes_[root()].depth = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      for (NodeId c : nodes_[order[i]].children) {
        nodes_[c].depth = nodes_[order[i]].depth + 1;
        order.push_back(c);
      }
    }
    for (NodeId id : order) {
      nodes_[id].volume = 0.0;
      nodes_[id].cut = 0.0;
      nodes_[id].size = 0;
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      TreeNode& nd = nodes_[*it];
      if (nd.is_leaf()) {
        nd.volume = g.degree(static_cast<Vertex>(nd.vertex));
        nd.size = 1;
      }
      if (*it != root()) {
        nodes_[nd.parent].volume += nd.volume;
        nodes_[nd.parent].size += nd.size;
      }
    }
    // An edge crosses exactly the nodes strictly below its lca on the two
    // leaf-to-lca paths.
    for (const auto& e : g.edges()) {
      NodeId a = leaf_of_vertex_[e.u];
      NodeId b = leaf_of_vertex_[e.v];
      while (nodes_[a].depth > nodes_[b].depth) {
        nodes_[a].cut += e.weight;
        a = nodes_[a].parent;
      }
      while (nodes_[b].depth > nodes_[a].depth) {
        nodes_[b].cut += e.weight;
        b = nodes_[b].parent;
      }
      while (a != b) {
        nodes_[a].cut += e.weight;
        nodes_[b].cut += e.weight;
        a = nodes_[a].parent;
        b = nodes_[b].parent;
      }
    }
  }

  // Throws IntegrityError unless alive nodes form a tree rooted at root()
  // whose leaves are in bijection with the vertices.
  void validate_topology() const {
    if (nodes_.empty()) throw IntegrityError("tree has no root");
    if (nodes_[root()].parent != root() || nodes_[root()].is_leaf()) {
      throw IntegrityError("malformed root");
    }
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<NodeId> stack{root()};
    seen[root()] = 1;
    std::size_t leaves = 0;
    while (!stack.empty()) {
      NodeId x = stack.back();
      stack.pop_back();
      const TreeNode& nd = nodes_[x];
      if (!nd.alive) throw IntegrityError("dead node " + std::to_string(x) + " is reachable");
      if (nd.is_leaf()) {
        if (!nd.children.empty()) throw IntegrityError("leaf with children");
        auto v = static_cast<std::size_t>(nd.vertex);
        if (v >= leaf_of_vertex_.size() || leaf_of_vertex_[v] != x) {
          throw IntegrityError("leaf map disagrees at node " + std::to_string(x));
        }
        ++leaves;
        continue;
      }
      if (nd.children.empty()) {
        throw IntegrityError("internal node " + std::to_string(x) + " has no children");
      }
      for (NodeId c : nd.children) {
        if (c >= nodes_.size()) throw IntegrityError("child id out of range");
        if (seen[c]) throw IntegrityError("node " + std::to_string(c) + " reached twice");
        if (nodes_[c].parent != x) throw IntegrityError("parent link broken at " + std::to_string(c));
        seen[c] = 1;
        stack.push_back(c);
      }
    }
    for (NodeId i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].alive && !seen[i]) throw IntegrityError("orphan node " + std::to_string(i));
    }
    if (leaves != leaf_of_vertex_.size()) {
      throw IntegrityError("tree has " + std::to_string(leaves) + " leaves for " +
                           std::to_string(leaf_of_vertex_.size()) + " vertices");
    }
  }

  // Test hook: overwrite a cached value to exercise repair paths.
  void debug_set_volume(NodeId id, double volume) { nodes_.at(id).volume = volume; }

 private:
  NodeId append_node(NodeId parent) {
    nodes_.emplace_back();
    nodes_.back().parent = parent;
    nodes_.back().depth = nodes_[parent].depth + 1;
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  void require_internal(NodeId id) const {
    if (id >= nodes_.size() || !nodes_[id].alive || nodes_[id].is_leaf()) {
      throw DomainError("node " + std::to_string(id) + " is not an alive internal node");
    }
  }

  // Re-derives depths in the subtree at `id` from its parent.
  void refresh_depth(NodeId id) {
    std::vector<NodeId> stack{id};
    while (!stack.empty()) {
      NodeId x = stack.back();
      stack.pop_back();
      nodes_[x].depth = nodes_[nodes_[x].parent].depth + 1;
      for (NodeId c : nodes_[x].children) stack.push_back(c);
    }
  }

  std::vector<TreeNode> nodes_;
  std::vector<NodeId> leaf_of_vertex_;
};

inline ClusterTree trivial_tree(const Graph& g) {
  if (g.num_vertices() == 0) throw DomainError("trivial_tree: empty graph");
  ClusterTree t(g.num_vertices());
  for (std::size_t v = 0; v < g.num_vertices(); ++v) t.add_leaf(t.root(), static_cast<Vertex>(v));
  t.recompute_caches(g);
  return t;
}

inline NodeId lca(const ClusterTree& t, Vertex u, Vertex v) { return t.lca(u, v); }

// Internal nodes grouped by depth: U_0 = {root}, U_1, ..., U_{h-1}. Requires
// every leaf to sit at the same depth h.
inline std::vector<std::vector<NodeId>> levels(const ClusterTree& t) {
  const std::uint32_t h = t.height();
  std::vector<std::vector<NodeId>> out(h);
  for (NodeId id : t.alive_nodes()) {
    const TreeNode& nd = t.node(id);
    if (nd.is_leaf()) {
      if (nd.depth != h) {
        throw DomainError("levels: leaf depths are not uniform (" + std::to_string(nd.depth) +
                          " vs " + std::to_string(h) + ")");
      }
    } else {
      out.at(nd.depth).push_back(id);
    }
  }
  return out;
}

inline ClusterTree recompute_caches(ClusterTree t, const Graph& g) {
  t.recompute_caches(g);
  return t;
}

// Tree document: internal nodes are {"name"?: str, "children": [...]}, leaves
// are {"leaf": label}. Node ids are not part of the format.
inline nlohmann::json serialize(const ClusterTree& t, const Graph& g) {
  using nlohmann::json;
  auto build = [&](auto&& self, NodeId id) -> json {
    const TreeNode& nd = t.node(id);
    if (nd.is_leaf()) return json{{"leaf", g.label(static_cast<Vertex>(nd.vertex))}};
    json obj = json::object();
    if (!nd.name.empty()) obj["name"] = nd.name;
    json kids = json::array();
    for (NodeId c : nd.children) kids.push_back(self(self, c));
    obj["children"] = std::move(kids);
    return obj;
  };
  return build(build, t.root());
}

inline ClusterTree deserialize(const nlohmann::json& doc, const Graph& g) {
  using nlohmann::json;
  ClusterTree t(g.num_vertices());
  auto fill = [&](auto&& self, const json& obj, NodeId at) -> void {
    if (!obj.is_object()) throw ParseError("tree node must be an object");
    if (obj.contains("name")) {
      if (!obj["name"].is_string()) throw ParseError("'name' must be a string");
      t.set_name(at, obj["name"].get<std::string>());
    }
    if (!obj.contains("children") || !obj["children"].is_array()) {
      throw ParseError("internal node needs a 'children' array");
    }
    if (obj["children"].empty()) throw ParseError("internal node with no children");
    for (const auto& child : obj["children"]) {
      if (!child.is_object()) throw ParseError("tree node must be an object");
      if (child.contains("leaf")) {
        if (!child["leaf"].is_string()) throw ParseError("'leaf' must be a string label");
        if (child.contains("children")) throw ParseError("leaf with children");
        const auto label = child["leaf"].get<std::string>();
        auto v = g.find_vertex(label);
        if (v == Graph::npos) throw ParseError("unknown leaf label '" + label + "'");
        try {
          t.add_leaf(at, static_cast<Vertex>(v));
        } catch (const DomainError&) {
          throw ParseError("duplicate leaf label '" + label + "'");
        }
      } else {
        self(self, child, t.add_internal(at));
      }
    }
  };
  if (doc.is_object() && doc.contains("leaf")) throw ParseError("root cannot be a leaf");
  fill(fill, doc, t.root());
  try {
    t.recompute_caches(g);
  } catch (const IntegrityError& e) {
    throw ParseError(std::string("tree does not cover the graph: ") + e.what());
  }
  return t;
}

inline std::string serialize_to_string(const ClusterTree& t, const Graph& g) {
  return serialize(t, g).dump(1) + "\n";
}

inline ClusterTree deserialize_from_string(const std::string& text, const Graph& g) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("tree document: ") + e.what());
  }
  return deserialize(doc, g);
}

}  // namespace hcse
