#include <gtest/gtest.h>

#include "hcse/cluster_tree.hpp"
#include "test_util.hpp"

namespace hcse {
namespace {

using testing::clique;
using testing::tree_from;

// Asserts every cached field equals a fresh recomputation.
void expect_coherent(const ClusterTree& t, const Graph& g) {
  ClusterTree fresh = recompute_caches(t, g);
  for (NodeId id : t.alive_nodes()) {
    const TreeNode& a = t.node(id);
    const TreeNode& b = fresh.node(id);
    EXPECT_NEAR(a.volume, b.volume, 1e-9 * std::max(1.0, b.volume)) << "node " << id;
    EXPECT_NEAR(a.cut, b.cut, 1e-9 * std::max(1.0, b.cut)) << "node " << id;
    EXPECT_EQ(a.size, b.size) << "node " << id;
    EXPECT_EQ(a.depth, b.depth) << "node " << id;
  }
}

TEST(ClusterTree, TrivialTreeOnK4) {
  auto g = clique(4);
  auto t = trivial_tree(g);
  EXPECT_DOUBLE_EQ(t.node(t.root()).volume, 12.0);
  EXPECT_DOUBLE_EQ(t.node(t.root()).cut, 0.0);
  EXPECT_EQ(t.children(t.root()).size(), 4u);
  for (Vertex v = 0; v < 4; ++v) {
    const auto& leaf = t.node(t.leaf_of(v));
    EXPECT_DOUBLE_EQ(leaf.volume, 3.0);
    EXPECT_DOUBLE_EQ(leaf.cut, 3.0);
    EXPECT_EQ(leaf.depth, 1u);
  }
  EXPECT_EQ(t.height(), 1u);
  EXPECT_EQ(t.parent(t.root()), t.root());
}

TEST(ClusterTree, TrivialTreeOnSingleVertex) {
  auto g = Graph::from_edges(1, {});
  auto t = trivial_tree(g);
  EXPECT_EQ(t.children(t.root()).size(), 1u);
  EXPECT_DOUBLE_EQ(t.node(t.root()).volume, 0.0);
}

TEST(ClusterTree, TrivialTreeOnPath) {
  auto g = load_edge_list_from_string("a b\nb c\n");
  auto t = trivial_tree(g);
  EXPECT_DOUBLE_EQ(t.node(t.root()).volume, 4.0);
  EXPECT_DOUBLE_EQ(t.node(t.leaf_of(0)).cut, 1.0);
  EXPECT_DOUBLE_EQ(t.node(t.leaf_of(1)).cut, 2.0);
  EXPECT_DOUBLE_EQ(t.node(t.leaf_of(2)).cut, 1.0);
}

TEST(ClusterTree, EmptyGraphHasNoTrivialTree) {
  EXPECT_THROW(trivial_tree(Graph::from_edges(0, {})), DomainError);
}

TEST(ClusterTree, Lca) {
  auto g = clique(4);
  auto flat = trivial_tree(g);
  EXPECT_EQ(lca(flat, 0, 3), flat.root());
  auto t = tree_from(g, "((0,1),(2,3))");
  const NodeId ab = t.parent(t.leaf_of(0));
  EXPECT_EQ(lca(t, 0, 1), ab);
  EXPECT_EQ(t.node(ab).size, 2u);
  EXPECT_EQ(lca(t, 0, 2), t.root());
  EXPECT_THROW(lca(t, 0, 0), DomainError);
  EXPECT_THROW(lca(t, 0, 7), DomainError);
}

TEST(ClusterTree, LcaIsDeepestCommonAncestor) {
  auto g = testing::random_graph(5, 20, 0.3);
  auto t = testing::random_tree(g, 5);
  for (const auto& e : g.edges()) {
    const NodeId a = lca(t, e.u, e.v);
    const auto under = t.leaves_under(a);
    EXPECT_NE(std::find(under.begin(), under.end(), e.u), under.end());
    EXPECT_NE(std::find(under.begin(), under.end(), e.v), under.end());
    for (NodeId c : t.children(a)) {
      const auto sub = t.leaves_under(c);
      const bool both = std::find(sub.begin(), sub.end(), e.u) != sub.end() &&
                        std::find(sub.begin(), sub.end(), e.v) != sub.end();
      EXPECT_FALSE(both);
    }
  }
}

TEST(ClusterTree, Levels) {
  auto g = clique(4);
  auto flat = levels(trivial_tree(g));
  ASSERT_EQ(flat.size(), 1u);
  EXPECT_EQ(flat[0], std::vector<NodeId>{0});

  auto t = tree_from(g, "((0,1),(2,3))");
  auto lv = levels(t);
  ASSERT_EQ(lv.size(), 2u);
  EXPECT_EQ(lv[1].size(), 2u);

  auto three = tree_from(g, "(((0,1)),((2,3)))");
  EXPECT_EQ(levels(three).size(), 3u);

  auto ragged = tree_from(g, "((0,1),2,3)");
  EXPECT_THROW(levels(ragged), DomainError);
}

TEST(ClusterTree, InvariantsOnRandomTrees) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto g = testing::random_graph(seed, 18, 0.3, 4.0);
    auto t = testing::random_tree(g, seed);
    double leaf_vol = 0.0;
    for (NodeId id : t.alive_nodes()) {
      const TreeNode& nd = t.node(id);
      if (nd.is_leaf()) {
        leaf_vol += nd.volume;
        EXPECT_NEAR(nd.cut, nd.volume, 1e-9);
        continue;
      }
      double vol = 0.0, cut = 0.0;
      for (NodeId c : nd.children) {
        vol += t.node(c).volume;
        cut += t.node(c).cut;
        EXPECT_EQ(t.node(c).depth, nd.depth + 1);
      }
      EXPECT_NEAR(nd.volume, vol, 1e-9);
      EXPECT_LE(nd.cut, cut + 1e-9);
      auto verts = t.leaves_under(id);
      std::vector<std::uint32_t> mark(g.num_vertices(), 0);
      EXPECT_NEAR(nd.cut, cut_of_vertex_set(g, verts, mark, 1), 1e-9);
    }
    EXPECT_NEAR(leaf_vol, g.total_volume(), 1e-9);
    EXPECT_DOUBLE_EQ(t.node(t.root()).cut, 0.0);
  }
}

TEST(ClusterTree, GroupAndContractKeepCachesCoherent) {
  auto g = testing::random_graph(21, 16, 0.35, 2.0);
  auto t = trivial_tree(g);
  const std::vector<NodeId> kids(t.children(t.root()).begin(), t.children(t.root()).end());
  const NodeId first[] = {kids[0], kids[3], kids[5]};
  const NodeId a = t.group_children(g, t.root(), first);
  const NodeId second[] = {kids[1], kids[2]};
  const NodeId b = t.group_children(g, t.root(), second);
  const NodeId outer[] = {a, b, kids[7]};
  const NodeId c = t.group_children(g, t.root(), outer);
  expect_coherent(t, g);
  EXPECT_EQ(t.node(kids[3]).depth, 3u);
  t.contract(a);
  expect_coherent(t, g);
  EXPECT_EQ(t.node(kids[3]).depth, 2u);
  EXPECT_EQ(t.parent(kids[3]), c);
  EXPECT_FALSE(t.node(a).alive);
}

TEST(ClusterTree, GroupChildrenErrors) {
  auto g = clique(4);
  auto t = tree_from(g, "((0,1),(2,3))");
  const NodeId leaf = t.leaf_of(0);
  const NodeId not_child[] = {leaf};
  EXPECT_THROW(t.group_children(g, t.root(), not_child), DomainError);
  EXPECT_THROW(t.group_children(g, t.root(), std::span<const NodeId>{}), DomainError);
  const NodeId block = t.parent(leaf);
  const NodeId twice[] = {block, block};
  EXPECT_THROW(t.group_children(g, t.root(), twice), DomainError);
  EXPECT_THROW(t.contract(t.root()), DomainError);
  EXPECT_THROW(t.contract(leaf), DomainError);
}

TEST(ClusterTree, RecomputeRepairsStaleVolume) {
  auto g = clique(4);
  auto t = tree_from(g, "((0,1),(2,3))");
  const NodeId block = t.parent(t.leaf_of(0));
  t.debug_set_volume(block, 0.0);
  auto fixed = recompute_caches(t, g);
  EXPECT_DOUBLE_EQ(fixed.node(block).volume, 6.0);
}

TEST(ClusterTree, RecomputeIsFixedPointOnTrivialTree) {
  auto g = testing::random_graph(2, 10, 0.5, 3.0);
  auto t = trivial_tree(g);
  expect_coherent(t, g);
}

TEST(ClusterTree, MissingLeafIsIntegrityError) {
  auto g = clique(3);
  ClusterTree t(3);
  t.add_leaf(t.root(), 0);
  t.add_leaf(t.root(), 1);
  EXPECT_THROW(t.recompute_caches(g), IntegrityError);
}

TEST(ClusterTree, DuplicateLeafIsRejected) {
  ClusterTree t(3);
  t.add_leaf(t.root(), 0);
  EXPECT_THROW(t.add_leaf(t.root(), 0), DomainError);
}

TEST(Serialization, RoundTripRandomTrees) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto g = testing::random_graph(seed, 15, 0.3);
    auto t = testing::random_tree(g, seed + 100);
    const auto text = serialize_to_string(t, g);
    auto back = deserialize_from_string(text, g);
    EXPECT_EQ(serialize_to_string(back, g), text);
    for (const auto& e : g.edges()) {
      EXPECT_EQ(back.node(lca(back, e.u, e.v)).size, t.node(lca(t, e.u, e.v)).size);
    }
  }
}

TEST(Serialization, UsesExternalLabelsAndNames) {
  auto g = load_edge_list_from_string("alice bob\ncarol dave\nbob carol\n");
  auto t = tree_from(g, "((alice,bob),(carol,dave))");
  t.set_name(t.root(), "top");
  auto doc = serialize(t, g);
  EXPECT_EQ(doc["name"], "top");
  EXPECT_EQ(doc["children"][0]["children"][0]["leaf"], "alice");
  auto back = deserialize(doc, g);
  EXPECT_EQ(back.node(back.root()).name, "top");
}

TEST(Serialization, SchemaViolations) {
  auto g = clique(3);
  EXPECT_THROW(deserialize_from_string(R"({"children":[{"leaf":"0"},{"leaf":"0"},{"leaf":"1"},{"leaf":"2"}]})", g), ParseError);
  EXPECT_THROW(deserialize_from_string(R"({"children":[{"leaf":"0"},{"leaf":"1"}]})", g), ParseError);
  EXPECT_THROW(deserialize_from_string(R"({"children":[{"leaf":"0"},{"leaf":"1"},{"leaf":"9"}]})", g), ParseError);
  EXPECT_THROW(deserialize_from_string(R"({"children":[]})", g), ParseError);
  EXPECT_THROW(deserialize_from_string(R"({"leaf":"0"})", g), ParseError);
  EXPECT_THROW(deserialize_from_string(R"({"children":[{"leaf":0}]})", g), ParseError);
  EXPECT_THROW(deserialize_from_string("[1,2", g), ParseError);
  EXPECT_THROW(deserialize_from_string(R"({"name":3,"children":[{"leaf":"0"},{"leaf":"1"},{"leaf":"2"}]})", g), ParseError);
}

}  // namespace
}  // namespace hcse
