#include <gtest/gtest.h>

#include "hcse/costs.hpp"
#include "hcse/hcse.hpp"
#include "hcse/oracle.hpp"
#include "test_util.hpp"

namespace hcse {
namespace {

using testing::random_graph;
using testing::random_tree;

constexpr int kCases = 60;
constexpr double kTol = 1e-9;

void expect_coherent(const ClusterTree& t, const Graph& g) {
  t.validate_topology();
  ClusterTree fresh = recompute_caches(t, g);
  for (NodeId id : t.alive_nodes()) {
    EXPECT_NEAR(t.node(id).volume, fresh.node(id).volume, kTol * std::max(1.0, fresh.node(id).volume));
    EXPECT_NEAR(t.node(id).cut, fresh.node(id).cut, kTol * std::max(1.0, fresh.node(id).cut));
    EXPECT_EQ(t.node(id).size, fresh.node(id).size);
    EXPECT_EQ(t.node(id).depth, fresh.node(id).depth);
  }
}

Graph case_graph(int seed) {
  const std::size_t n = 4 + static_cast<std::size_t>(seed % 13);
  const double max_weight = seed % 2 ? 5.0 : 0.0;
  return random_graph(static_cast<std::uint64_t>(seed), n, 0.35 + 0.05 * (seed % 7), max_weight);
}

TEST(Property, IdentityResidualVanishes) {
  for (int seed = 1; seed <= kCases; ++seed) {
    auto g = case_graph(seed);
    if (!(g.total_volume() > 0.0)) continue;
    auto t = random_tree(g, static_cast<std::uint64_t>(seed));
    EXPECT_NEAR(theorem21_identity_residual(g, t), 0.0, kTol) << "seed " << seed;
  }
}

TEST(Property, LocalEntropiesSumToTreeEntropy) {
  for (int seed = 1; seed <= kCases; ++seed) {
    auto g = case_graph(seed);
    if (!(g.total_volume() > 0.0)) continue;
    auto t = random_tree(g, static_cast<std::uint64_t>(seed) + 1000);
    double sum = 0.0;
    for (NodeId u : t.internal_nodes()) sum += local_entropy(t, g, u);
    EXPECT_NEAR(sum, structural_entropy(g, t), kTol) << "seed " << seed;
  }
}

// Every closed-form gain, penalty and trial saving matches the entropy
// difference measured on the full tree, and none is negative.
TEST(Property, TrialQuantitiesMatchBruteForce) {
  HcseOptions opts;
  opts.validate = true;
  for (int seed = 1; seed <= kCases; ++seed) {
    auto g = case_graph(seed);
    if (!(g.total_volume() > 0.0)) continue;
    auto t = random_tree(g, static_cast<std::uint64_t>(seed) + 2000);
    for (NodeId u : t.internal_nodes()) {
      auto tr = trial_stratify(t, g, u, opts);
      ASSERT_TRUE(tr.validation.has_value());
      EXPECT_LE(tr.validation->max_merge_gain_error, kTol) << "seed " << seed << " apex " << u;
      EXPECT_LE(tr.validation->max_penalty_error, kTol) << "seed " << seed << " apex " << u;
      EXPECT_LE(tr.validation->delta_error, kTol) << "seed " << seed << " apex " << u;
      EXPECT_GE(tr.delta_h, 0.0);
      for (double x : tr.merge_gains) EXPECT_GE(x, 0.0);
      for (double x : tr.penalties) EXPECT_GE(x, 0.0);
      EXPECT_GE(tr.sparsity(), 0.0);
      // Groups partition the apex's children.
      std::vector<NodeId> seen;
      for (const auto& grp : tr.groups) seen.insert(seen.end(), grp.begin(), grp.end());
      std::sort(seen.begin(), seen.end());
      std::vector<NodeId> kids(t.children(u).begin(), t.children(u).end());
      std::sort(kids.begin(), kids.end());
      EXPECT_EQ(seen, kids);
    }
  }
}

TEST(Property, RoundsMatchEntropyDropAndKeepCaches) {
  HcseOptions opts;
  opts.validate = true;
  for (int seed = 1; seed <= kCases / 2; ++seed) {
    auto g = case_graph(seed);
    if (!(g.total_volume() > 0.0)) continue;
    const std::size_t k = 2 + static_cast<std::size_t>(seed % 3);
    auto r = k_hcse(g, k, opts);
    expect_coherent(r.tree, g);
    EXPECT_LE(r.tree.height(), std::max<std::size_t>(k, 1));
    ASSERT_TRUE(r.trace.validation.has_value());
    const auto& v = *r.trace.validation;
    EXPECT_LE(v.max_round_delta_error, kTol) << "seed " << seed;
    EXPECT_LE(v.max_trial_delta_error, kTol) << "seed " << seed;
    EXPECT_GE(v.min_trial_delta, 0.0);
    double dropped = 0.0;
    for (const auto& round : r.trace.rounds) {
      EXPECT_GE(round.delta_h, 0.0);
      dropped += round.delta_h;
    }
    EXPECT_NEAR(one_level_entropy(g) - structural_entropy(g, r.tree), dropped, kTol) << "seed " << seed;
  }
}

TEST(Property, MergeGainEqualsEntropyDropOfGrouping) {
  for (int seed = 1; seed <= kCases; ++seed) {
    auto g = case_graph(seed);
    if (!(g.total_volume() > 0.0)) continue;
    auto t = trivial_tree(g);
    auto tri = make_triangle(t, g, t.root());
    const NodeId a = tri.children[0], b = tri.children[1];
    ClusterTree grouped = t;
    const NodeId pair[2] = {a, b};
    grouped.group_children(g, grouped.root(), pair);
    EXPECT_NEAR(structural_entropy(g, t) - structural_entropy(g, grouped), merge_gain(tri, a, b), kTol);
  }
}

TEST(Property, CostSeArgminMinimisesEntropy) {
  for (int seed = 1; seed <= 8; ++seed) {
    auto g = random_graph(static_cast<std::uint64_t>(seed), 5, 0.6, 2.0);
    if (!(g.total_volume() > 0.0)) continue;
    auto best = brute_min(g, cost_se, TreeMode::kBinary);
    auto by_h = brute_min(g, structural_entropy, TreeMode::kBinary);
    for (const auto& t : best.argmin) EXPECT_NEAR(structural_entropy(g, t), by_h.min_value, kTol);
  }
}

}  // namespace
}  // namespace hcse
