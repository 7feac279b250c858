#include <gtest/gtest.h>

#include "gmec/oracle.hpp"
#include "gmec/pruning.hpp"
#include "gmec_test_support.hpp"

namespace gmec {
namespace {

TEST(Goldstein, Toy2PrunesDominatedRotamers) {
  const PruneResult r = goldstein_singles(testing::toy2());
  ASSERT_EQ(r.kept.size(), 2u);
  EXPECT_EQ(r.kept[0], std::vector<Rotamer>({0}));
  EXPECT_EQ(r.kept[1], std::vector<Rotamer>({1}));
  EXPECT_EQ(r.reduced.domains(), std::vector<int>({1, 1}));
  EXPECT_EQ(r.expand(Assignment{0, 0}), Assignment({0, 1}));
  EXPECT_DOUBLE_EQ(total_energy(r.reduced, Assignment{0, 0}), 1.6);
}

TEST(Goldstein, SymmetricTieKeepsBoth) {
  // Residue 0 has two identical rotamers; strict inequality fails both ways.
  const EnergyModel m({2, 2}, 0.0, {{1.0, 1.0}, {0.0, 3.0}}, {{0, 1, {0.5, 0.2, 0.5, 0.2}}});
  const PruneResult r = goldstein_singles(m);
  EXPECT_EQ(r.kept[0], std::vector<Rotamer>({0, 1}));
}

TEST(Goldstein, NeverEmptiesADomain) {
  const EnergyModel m({3}, 0.0, {{2.0, 1.0, 3.0}}, {});
  const PruneResult r = goldstein_singles(m);
  EXPECT_EQ(r.kept[0], std::vector<Rotamer>({1}));
}

TEST(Goldstein, NothingToPruneTakesOneRound) {
  const EnergyModel m({1, 1}, 0.0, {{1.0}, {2.0}}, {{0, 1, {0.5}}});
  const PruneResult r = goldstein_singles(m);
  EXPECT_EQ(r.reduced, m);
  EXPECT_EQ(r.rounds, 1);
}

TEST(Goldstein, SoundOnRandomSuite) {
  for (int idx = 0; idx < 200; ++idx) {
    const EnergyModel m = testing::suite_instance(idx);
    const PruneResult r = goldstein_singles(m);
    for (int i = 0; i < m.size(); ++i) {
      ASSERT_FALSE(r.kept[i].empty());
      EXPECT_EQ(r.reduced.domain(i), static_cast<int>(r.kept[i].size()));
    }
    const Conformation full = brute_force_min(m);
    const Conformation reduced = brute_force_min(r.reduced);
    EXPECT_EQ(total_energy(m, r.expand(reduced.assignment)), full.energy) << "instance " << idx;
    EXPECT_EQ(reduced.energy, full.energy) << "instance " << idx;
  }
}

TEST(Goldstein, ExpandReproducesReducedEnergy) {
  for (int idx = 0; idx < 50; ++idx) {
    const EnergyModel m = testing::suite_instance(idx);
    const PruneResult r = goldstein_singles(m);
    SplitMix64 rng(idx);
    for (int t = 0; t < 20; ++t) {
      const Assignment x = testing::random_assignment(r.reduced, rng);
      EXPECT_EQ(total_energy(m, r.expand(x)), total_energy(r.reduced, x));
    }
  }
}

TEST(Goldstein, FixpointAndDeterminism) {
  for (int idx = 0; idx < 100; ++idx) {
    const EnergyModel m = testing::suite_instance(idx);
    const PruneResult r = goldstein_singles(m);
    const PruneResult again = goldstein_singles(r.reduced);
    EXPECT_EQ(again.reduced, r.reduced);
    EXPECT_EQ(again.rounds, 1);
    const PruneResult twin = goldstein_singles(m);
    EXPECT_EQ(twin.kept, r.kept);
    EXPECT_EQ(twin.rounds, r.rounds);
  }
}

TEST(RestrictModel, KeepsSelectedRows) {
  const EnergyModel m = testing::toy2();
  const EnergyModel r = restrict_model(m, {{1}, {0, 1}});
  EXPECT_EQ(r.domains(), std::vector<int>({1, 2}));
  EXPECT_EQ(r.pair_energy(0, 0, 1, 0), 0.4);
  EXPECT_EQ(r.pair_energy(0, 0, 1, 1), 0.2);
  EXPECT_THROW(restrict_model(m, {{}, {0}}), InvalidArgument);
}

}  // namespace
}  // namespace gmec
