#include <gtest/gtest.h>

#include <set>

#include "gmec/oracle.hpp"
#include "gmec_test_support.hpp"

namespace gmec {
namespace {

TEST(BruteForceMin, Toy2) {
  const Conformation c = brute_force_min(testing::toy2());
  EXPECT_EQ(c.assignment, Assignment({0, 1}));
  EXPECT_DOUBLE_EQ(c.energy, 1.6);
}

TEST(BruteForceMin, EdgelessIsPerResidueArgmin) {
  const EnergyModel m({3, 2}, 0.0, {{3, 1, 2}, {0.5, 0.25}}, {});
  EXPECT_EQ(brute_force_min(m).assignment, Assignment({1, 1}));
}

TEST(BruteForceMin, TiesGoToSmallestAssignment) {
  // (0,1) and (1,0) both cost 0.
  const EnergyModel tie({2, 2}, 0.0, {{0, 0}, {0, 0}}, {{0, 1, {1, 0, 0, 1}}});
  EXPECT_EQ(brute_force_min(tie).assignment, Assignment({0, 1}));
}

TEST(BruteForceMin, EnforcesCap) {
  const EnergyModel m = random_instance(1, 20, 4, 0.2, 1.0);
  EXPECT_THROW(brute_force_min(m, 1e3), ResourceError);
}

TEST(BruteForceTopK, Toy2) {
  const KBestList l = brute_force_topk(testing::toy2(), 4, kInfinity);
  ASSERT_EQ(l.conformations.size(), 4u);
  const std::vector<Energy> expect{1.6, 2.0, 2.3, 2.6};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(l.conformations[i].energy, expect[i]);
}

TEST(BruteForceTopK, KOneAndDeltaZero) {
  for (int idx = 0; idx < 30; ++idx) {
    const EnergyModel m = testing::suite_instance(idx);
    const Conformation best = brute_force_min(m);
    const KBestList one = brute_force_topk(m, 1, kInfinity);
    ASSERT_EQ(one.conformations.size(), 1u);
    EXPECT_EQ(one.conformations[0], best);
    const KBestList zero = brute_force_topk(m, 5, 0.0);
    for (const auto& c : zero.conformations) EXPECT_EQ(c.energy, best.energy);
  }
}

TEST(BruteForceTopK, EnumeratesEveryConformationOnce) {
  const EnergyModel m = random_instance(2, 5, 3, 0.5, 1.0);
  const auto space = static_cast<std::size_t>(m.space_size());
  const KBestList l = brute_force_topk(m, space, kInfinity);
  ASSERT_EQ(l.conformations.size(), space);
  std::set<Assignment> seen;
  for (const auto& c : l.conformations) seen.insert(c.assignment);
  EXPECT_EQ(seen.size(), space);
}

TEST(BruteForceTopK, RejectsBadArguments) {
  EXPECT_THROW(brute_force_topk(testing::toy2(), 0, 1.0), InvalidArgument);
  EXPECT_THROW(brute_force_topk(testing::toy2(), 1, -1.0), InvalidArgument);
}

TEST(PlainBnb, Toy2) {
  EXPECT_DOUBLE_EQ(plain_bnb(testing::toy2()).conformation.energy, 1.6);
  EXPECT_DOUBLE_EQ(plain_bnb(testing::toy2(), {true, std::nullopt}).conformation.energy, 1.6);
}

TEST(PlainBnb, SingleResidueVisitsEveryLeaf) {
  const EnergyModel m({5}, 0.0, {{0.1, 0.2, 0.3, 0.4, 0.5}}, {});
  const PlainBnbResult r = plain_bnb(m);
  EXPECT_EQ(r.leaf_visits, 5u);
  EXPECT_EQ(r.conformation.assignment, Assignment({0}));
}

TEST(PlainBnb, AgreesWithEnumeration) {
  for (int idx = 0; idx < 200; ++idx) {
    const EnergyModel m = testing::suite_instance(idx);
    const Energy truth = brute_force_min(m).energy;
    EXPECT_EQ(plain_bnb(m).conformation.energy, truth);
    EXPECT_EQ(plain_bnb(m, {true, std::nullopt}).conformation.energy, truth);
  }
}

TEST(PlainBnb, BoundPrunesMore) {
  for (int idx = 0; idx < 50; ++idx) {
    const EnergyModel m = testing::suite_instance(idx);
    EXPECT_LE(plain_bnb(m, {true, std::nullopt}).stats.expanded_and,
              plain_bnb(m).stats.expanded_and);
  }
}

TEST(PlainBnb, TraceIsNonIncreasing) {
  for (int idx = 0; idx < 50; ++idx) {
    const auto tr = plain_bnb(testing::suite_instance(idx)).stats.incumbent_trace;
    for (std::size_t i = 1; i < tr.size(); ++i) EXPECT_LT(tr[i], tr[i - 1]);
  }
}

TEST(PlainBnb, NegativeEnergiesNeedTheBound) {
  const EnergyModel m({2}, 0.0, {{-1.0, 0.5}}, {});
  EXPECT_THROW(plain_bnb(m), InvalidArgument);
  EXPECT_EQ(plain_bnb(m, {true, std::nullopt}).conformation.energy, -1.0);
}

TEST(PlainBnb, TwoComponentsExploreTheProduct) {
  const EnergyModel m = testing::two_component_instance(0);
  const PlainBnbResult r = plain_bnb(m);
  EXPECT_GT(r.leaf_visits, 27u);
}

}  // namespace
}  // namespace gmec
