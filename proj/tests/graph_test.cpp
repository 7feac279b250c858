#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "gmec/graph.hpp"
#include "gmec/oracle.hpp"
#include "gmec_test_support.hpp"

namespace gmec {
namespace {

InteractionGraph chain(int n) {
  std::vector<std::pair<Residue, Residue>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return InteractionGraph(n, e);
}

TEST(Sparsify, Toy2SmallLambdaKeepsEdge) {
  const SparsifiedModel s = build_interaction_graph(testing::toy2(), 0.04);
  EXPECT_EQ(s.graph.edges().size(), 1u);
  EXPECT_EQ(s.graph.dropped_error_bound(), 0.0);
  EXPECT_EQ(s.model, testing::toy2());
}

TEST(Sparsify, Toy2LargeLambdaDropsEdge) {
  const SparsifiedModel s = build_interaction_graph(testing::toy2(), 0.5);
  EXPECT_TRUE(s.graph.edges().empty());
  EXPECT_TRUE(s.model.pairs().empty());
  EXPECT_EQ(s.model.e0(), 1.0);
  EXPECT_EQ(s.graph.dropped_error_bound(), 0.4);
}

TEST(Sparsify, ZeroLambdaKeepsNonConstantTables) {
  // Domains of 3 and random entries: no table is constant.
  const EnergyModel m = testing::two_component_instance(5);
  const SparsifiedModel s = build_interaction_graph(m, 0.0);
  EXPECT_EQ(s.graph.edges().size(), m.pairs().size());
  EXPECT_EQ(s.model, m);
}

TEST(Sparsify, ConstantTableFoldsIntoE0) {
  const EnergyModel m({2, 2}, 1.0, {{0, 0}, {0, 0}}, {{0, 1, {0.75, 0.75, 0.75, 0.75}}});
  const SparsifiedModel s = build_interaction_graph(m, 0.0);
  EXPECT_TRUE(s.graph.edges().empty());
  EXPECT_EQ(s.model.e0(), 1.75);
  EXPECT_EQ(s.graph.dropped_error_bound(), 0.0);
}

TEST(Sparsify, RejectsNegativeLambda) {
  EXPECT_THROW(build_interaction_graph(testing::toy2(), -0.1), InvalidArgument);
}

TEST(Sparsify, ErrorBoundHoldsOnProbes) {
  for (double lambda : {0.04, 0.5}) {
    for (int idx = 0; idx < 50; ++idx) {
      const EnergyModel m = testing::suite_instance(idx);
      const SparsifiedModel s = build_interaction_graph(m, lambda);
      const Energy bound = s.graph.dropped_error_bound();
      SplitMix64 rng(idx);
      for (int t = 0; t < 200; ++t) {
        const Assignment x = testing::random_assignment(m, rng);
        const Energy diff = total_energy(m, x) - total_energy(s.model, x);
        EXPECT_GE(diff, -1e-12);
        EXPECT_LE(diff, bound + 1e-12);
      }
      const Conformation truth = brute_force_min(m);
      const Conformation approx = brute_force_min(s.model);
      EXPECT_LE(total_energy(m, approx.assignment) - truth.energy, bound + 1e-12);
    }
  }
}

TEST(MinFill, SmallGraphs) {
  EXPECT_EQ(min_fill_ordering(InteractionGraph(3, {{0, 1}, {1, 2}, {0, 2}})).induced_width, 2);
  EXPECT_EQ(min_fill_ordering(chain(6)).induced_width, 1);
  EXPECT_EQ(min_fill_ordering(InteractionGraph(4, {})).induced_width, 0);
  EXPECT_EQ(min_fill_ordering(InteractionGraph(4, {})).order, std::vector<Residue>({0, 1, 2, 3}));
}

TEST(MinFill, CompleteGraph) {
  std::vector<std::pair<Residue, Residue>> e;
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) e.emplace_back(i, j);
  EXPECT_EQ(min_fill_ordering(InteractionGraph(5, e)).induced_width, 4);
}

TEST(MinFill, CycleNeedsWidthTwo) {
  const InteractionGraph g(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}});
  const EliminationOrdering o = min_fill_ordering(g);
  EXPECT_EQ(o.induced_width, 2);
  EXPECT_EQ(induced_width(g, o.order), 2);
}

TEST(MinFill, OrderIsPermutationAndWidthConsistent) {
  for (int idx = 0; idx < 100; ++idx) {
    const EnergyModel m = random_instance(idx, 3 + idx % 20, 3, 0.3, 1.0);
    const InteractionGraph g = InteractionGraph::of(m);
    const EliminationOrdering o = min_fill_ordering(g);
    std::vector<Residue> sorted = o.order;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < g.size(); ++i) EXPECT_EQ(sorted[i], i);
    EXPECT_EQ(induced_width(g, o.order), o.induced_width);
  }
}

TEST(InducedWidth, RejectsNonPermutation) {
  EXPECT_THROW(induced_width(chain(3), {0, 0, 1}), InvalidArgument);
  EXPECT_THROW(induced_width(chain(3), {0, 1}), InvalidArgument);
}

TEST(PseudoTreeValidity, SixResidueTreeIsValid) {
  const PseudoTree t = testing::six_residue_tree();
  EXPECT_TRUE(validate_pseudo_tree(testing::six_residue_graph(), t));
  EXPECT_EQ(t.roots(), std::vector<Residue>({0}));
  EXPECT_EQ(t.depth(), 4);
  EXPECT_EQ(t.order(), std::vector<Residue>({0, 1, 2, 4, 3, 5}));
}

TEST(PseudoTreeValidity, SiblingEdgeIsRejected) {
  // A->B, A->C, C->E, B->D, D->F: edge B-C spans two branches.
  const PseudoTree bad = PseudoTree::from_parents({-1, 0, 0, 1, 2, 3});
  EXPECT_FALSE(validate_pseudo_tree(testing::six_residue_graph(), bad));
}

TEST(PseudoTreeValidity, EdgelessGraphGivesIndependentRoots) {
  const InteractionGraph g(3, {});
  const PseudoTree t = build_pseudo_tree(g);
  EXPECT_TRUE(validate_pseudo_tree(g, t));
  EXPECT_EQ(t.roots(), std::vector<Residue>({0, 1, 2}));
  EXPECT_EQ(t.depth(), 1);
}

TEST(PseudoTreeValidity, FromParentsRejectsCycles) {
  EXPECT_THROW(PseudoTree::from_parents({1, 0}), InvalidArgument);
  EXPECT_THROW(PseudoTree::from_parents({0}), InvalidArgument);
  EXPECT_THROW(PseudoTree::from_parents({-1, 5}), InvalidArgument);
}

TEST(PseudoTreeValidity, SixResidueGraphBuildsValidTree) {
  const InteractionGraph g = testing::six_residue_graph();
  const EliminationOrdering o = min_fill_ordering(g);
  const PseudoTree t = build_pseudo_tree(g, o);
  EXPECT_TRUE(validate_pseudo_tree(g, t));
  EXPECT_GE(t.depth(), o.induced_width + 1);
}

TEST(PseudoTreeValidity, RandomSuite) {
  for (int idx = 0; idx < 300; ++idx) {
    const EnergyModel m = random_instance(1000 + idx, 2 + idx % 30, 3, (idx % 10) / 10.0, 1.0);
    const InteractionGraph g = InteractionGraph::of(m);
    const EliminationOrdering o = min_fill_ordering(g);
    const PseudoTree t = build_pseudo_tree(g, o);
    ASSERT_TRUE(validate_pseudo_tree(g, t)) << "instance " << idx;
    // Every node has a depth-first position and a consistent level.
    for (Residue v = 0; v < t.size(); ++v) {
      const Residue p = t.parent(v);
      EXPECT_EQ(t.level(v), p < 0 ? 1 : t.level(p) + 1);
    }
    EXPECT_GE(t.depth(), o.induced_width + (g.size() > 0 ? 1 : 0));
  }
}

TEST(PseudoTreeValidity, ComponentsStaySeparate) {
  // Two triangles with no edge between them.
  const InteractionGraph g(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
  const PseudoTree t = build_pseudo_tree(g);
  EXPECT_EQ(t.roots().size(), 2u);
  for (Residue a : {0, 1, 2})
    for (Residue b : {3, 4, 5}) {
      EXPECT_FALSE(t.is_ancestor(a, b));
      EXPECT_FALSE(t.is_ancestor(b, a));
    }
}

TEST(PseudoTreeValidity, AncestorsAndSubtree) {
  const PseudoTree t = testing::six_residue_tree();
  EXPECT_EQ(t.ancestors(4), std::vector<Residue>({2, 1, 0}));
  EXPECT_EQ(t.subtree(1), std::vector<Residue>({1, 2, 4, 3, 5}));
  EXPECT_TRUE(t.is_ancestor(0, 5));
  EXPECT_FALSE(t.is_ancestor(2, 5));
  EXPECT_FALSE(t.is_ancestor(5, 5));
}

}  // namespace
}  // namespace gmec
