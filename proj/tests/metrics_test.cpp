#include <gtest/gtest.h>

#include "hcse/hsbm.hpp"
#include "hcse/metrics.hpp"
#include "test_util.hpp"

namespace hcse {
namespace {

using testing::clique;
using testing::tree_from;

std::vector<std::vector<Vertex>> sorted_blocks(FlatPartition p) {
  for (auto& b : p.blocks) std::sort(b.begin(), b.end());
  std::sort(p.blocks.begin(), p.blocks.end());
  return p.blocks;
}

TEST(PartitionAtLevel, Examples) {
  auto g = clique(4);
  auto flat = partition_at_level(trivial_tree(g), 0);
  EXPECT_EQ(flat.blocks.size(), 4u);
  auto t = tree_from(g, "((0,1),(2,3))");
  EXPECT_EQ(sorted_blocks(partition_at_level(t, 0)), (std::vector<std::vector<Vertex>>{{0, 1}, {2, 3}}));
  EXPECT_EQ(partition_at_level(t, 1).blocks.size(), 4u);
  EXPECT_THROW(partition_at_level(t, 2), DomainError);
}

TEST(PartitionAtLevel, PlantedTreeMatchesPlantedPartition) {
  HsbmSpec spec;
  spec.n = 80;
  spec.level_cluster_counts = {3, 7};
  spec.p = {0.01, 0.1, 0.5};
  auto inst = generate(spec);
  for (std::size_t j = 0; j < 2; ++j) {
    FlatPartition truth{planted_partition(inst.truth, j)};
    EXPECT_EQ(sorted_blocks(partition_at_level(inst.truth.tree, j)), sorted_blocks(truth));
  }
}

TEST(Nmi, Examples) {
  FlatPartition a{{{0, 1}, {2, 3}}};
  FlatPartition b{{{0, 2}, {1, 3}}};
  FlatPartition one{{{0, 1, 2, 3}}};
  EXPECT_DOUBLE_EQ(nmi(a, a), 1.0);
  EXPECT_NEAR(nmi(a, b), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(nmi(one, a), 0.0);
  EXPECT_DOUBLE_EQ(nmi(one, one), 1.0);
  EXPECT_DOUBLE_EQ(nmi(one, a, NmiNormalization::kGeometric), 0.0);
}

TEST(Nmi, HandComputedValue) {
  // a = {0,1,2}{3,4,5}, b = {0,1}{2,3}{4,5}: H(a) = 1, H(b) = log2 3,
  // H(b|a) = h(1/3, 2/3) = log2 3 - 2/3, so I = 2/3.
  FlatPartition a{{{0, 1, 2}, {3, 4, 5}}};
  FlatPartition b{{{0, 1}, {2, 3}, {4, 5}}};
  const double i = 2.0 / 3.0;
  EXPECT_NEAR(nmi(a, b), i / ((1.0 + std::log2(3.0)) / 2.0), 1e-12);
  EXPECT_NEAR(nmi(a, b, NmiNormalization::kGeometric), i / std::sqrt(std::log2(3.0)), 1e-12);
}

TEST(Nmi, SymmetricAndRelabelInvariant) {
  FlatPartition a{{{0, 4, 5}, {1, 2}, {3, 6, 7}}};
  FlatPartition b{{{0, 1}, {2, 3, 4}, {5, 6, 7}}};
  FlatPartition b2{{{5, 6, 7}, {0, 1}, {4, 3, 2}}};
  EXPECT_DOUBLE_EQ(nmi(a, b), nmi(b, a));
  EXPECT_NEAR(nmi(a, b), nmi(a, b2), 1e-12);
  EXPECT_GE(nmi(a, b), 0.0);
  EXPECT_LE(nmi(a, b), 1.0);
}

TEST(Nmi, UniverseMismatch) {
  FlatPartition a{{{0, 1}, {2, 3}}};
  FlatPartition b{{{0, 1, 2}}};
  EXPECT_THROW(nmi(a, b), DomainError);
  FlatPartition gap{{{0, 1}, {2, 5}}};
  EXPECT_THROW(nmi(a, gap), DomainError);
  FlatPartition overlap{{{0, 1}, {1, 2}}};
  EXPECT_THROW(overlap.labels(4), DomainError);
}

TEST(Jaccard, Definition) {
  const std::vector<Vertex> a{1, 2, 3}, b{3, 4}, c{5};
  EXPECT_DOUBLE_EQ(jaccard(a, a), 1.0);
  EXPECT_DOUBLE_EQ(jaccard(a, c), 0.0);
  EXPECT_DOUBLE_EQ(jaccard(a, b), 0.25);
}

TEST(AvgJaccard, Examples) {
  auto g = clique(4);
  auto t = tree_from(g, "((0,1),(2,3))");
  const std::vector<std::vector<Vertex>> own{{0, 1}, {2, 3}, {0, 1, 2, 3}};
  EXPECT_DOUBLE_EQ(avg_jaccard(t, own), 1.0);
  const std::vector<std::vector<Vertex>> abc{{0, 1, 2}};
  EXPECT_DOUBLE_EQ(avg_jaccard(t, abc), 0.75);
  EXPECT_THROW(avg_jaccard(t, std::vector<std::vector<Vertex>>{}), DomainError);
  EXPECT_THROW(avg_jaccard(t, std::vector<std::vector<Vertex>>{{}}), DomainError);
}

TEST(AvgJaccard, OrderInvariantAndMonotone) {
  auto g = testing::random_graph(4, 12, 0.4);
  auto t = testing::random_tree(g, 4);
  std::vector<std::vector<Vertex>> truth{{0, 1, 2, 3}, {4, 5, 6}, {7, 8, 9, 10, 11}};
  const double base = avg_jaccard(t, truth);
  std::reverse(truth.begin(), truth.end());
  EXPECT_DOUBLE_EQ(avg_jaccard(t, truth), base);

  // Adding one truth cluster as an extra node can only help.
  auto g2 = clique(6);
  auto t2 = tree_from(g2, "((0,1,2,3),(4,5))");
  const std::vector<std::vector<Vertex>> want{{0, 1}};
  const double before = avg_jaccard(t2, want);
  auto t3 = tree_from(g2, "(((0,1),2,3),(4,5))");
  EXPECT_GE(avg_jaccard(t3, want), before);
  EXPECT_DOUBLE_EQ(avg_jaccard(t3, want), 1.0);
}

}  // namespace
}  // namespace hcse
