// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "gmec/gmec.hpp"
#include "gmec_test_support.hpp"

namespace {

using namespace gmec;
using gmec::testing::Structure;

constexpr int kSuiteSize = 200;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Criterion 1: solve vs exhaustive minimum on 200 random instances.
Outcome gmec_oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  int mismatches = 0;
  for (int idx = 0; idx < kSuiteSize; ++idx) {
    const EnergyModel m = gmec::testing::suite_instance(idx);
    const Energy truth = brute_force_min(m).energy;
    // Raw search on the unreduced model.
    const Structure s(m);
    const Solution raw = solve(m, s.tree, mini_bucket_elimination(m, s.tree, 2));
    // Default pipeline: DEE, automatic i-bound, answer mapped back.
    const Pipeline p = prepare(m, PipelineConfig{});
    const Solution sol = solve(p.searched(), p.tree, p.heuristic);
    const Conformation mapped = p.to_original(sol.conformation);
    if (raw.conformation.energy != truth || mapped.energy != truth) ++mismatches;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream d;
  d << kSuiteSize << " instances, " << mismatches << " mismatches, " << secs << " s";
  return {mismatches == 0 && secs < 60.0, d.str()};
}

// Criterion 2: k-best vs exhaustive top-k.
Outcome kbest_oracle_equivalence() {
  int runs = 0, mismatches = 0;
  for (int idx = 0; idx < 100; ++idx) {
    const EnergyModel m = gmec::testing::suite_instance(idx);
    const Structure s(m);
    const auto h = mini_bucket_elimination(m, s.tree, 2);
    const std::size_t k = 1 + idx % 5;
    for (Energy delta : {0.0, 0.5, kInfinity}) {
      ++runs;
      if (kbest_solve(m, s.tree, h, k, delta).conformations !=
          brute_force_topk(m, k, delta).conformations)
        ++mismatches;
    }
  }
  return {mismatches == 0,
          std::to_string(runs) + " runs, " + std::to_string(mismatches) + " mismatches"};
}

// Criterion 3: the worked AND-merge example.
Outcome merge_fixture() {
  const auto r = merge_and({{1, 2, 3}, {1, 3, 6}, {1, 5, 10}}, 3);
  const bool values = r.values == std::vector<Energy>{3, 4, 5};
  // Sequences are reported 0-based: (1,1,1),(2,1,1),(1,2,1) in 1-based form.
  const bool seqs =
      r.sequences == std::vector<std::vector<std::size_t>>{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  std::ostringstream d;
  d << "values " << (values ? "ok" : "wrong") << ", sequences " << (seqs ? "ok" : "wrong")
    << ", pops " << r.stats.pops << ", pushes " << r.stats.pushes;
  return {values && seqs && r.stats.pops <= 3 && r.stats.pushes <= 10, d.str()};
}

// Criterion 4: bucket elimination is exact, and so is a wide mini-bucket.
Outcome bucket_exactness() {
  int be_bad = 0, mbe_bad = 0;
  for (int idx = 0; idx < kSuiteSize; ++idx) {
    const EnergyModel m = gmec::testing::suite_instance(idx);
    const Structure s(m);
    const BucketTables be = bucket_elimination(m, s.tree);
    if (be.root_value != brute_force_min(m).energy) ++be_bad;
    const int ib = std::max(2, s.ordering.induced_width + 1);
    const auto mbe = mini_bucket_elimination(m, s.tree, ib);
    bool same = mbe.messages().size() == be.tables.messages().size() &&
                mbe.root_bound() == be.tables.root_bound();
    for (std::size_t i = 0; same && i < mbe.messages().size(); ++i)
      same = mbe.messages()[i].values == be.tables.messages()[i].values;
    if (!same) ++mbe_bad;
  }
  return {be_bad == 0 && mbe_bad == 0, std::to_string(be_bad) + " root-value mismatches, " +
                                           std::to_string(mbe_bad) + " mini-bucket mismatches"};
}

// Criterion 5: sampled heuristic values never exceed the true completion.
Outcome admissibility() {
  int samples = 0, violations = 0;
  for (int idx = 0; idx < 50; ++idx) {
    const EnergyModel m = gmec::testing::suite_instance(4 * idx + 3);
    const Structure s(m);
    const auto h = mini_bucket_elimination(m, s.tree, 2);
    SplitMix64 rng(1000 + idx);
    for (int t = 0; t < 1000; ++t) {
      const Residue x = static_cast<Residue>(rng.below(m.size()));
      std::vector<Rotamer> ctx(m.size(), -1);
      for (Residue a : s.tree.ancestors(x)) ctx[a] = static_cast<Rotamer>(rng.below(m.domain(a)));
      Energy hv, exact;
      if (rng.below(2) == 0) {
        hv = h.evaluate(SearchPosition::or_node(x), ctx);
        exact = gmec::testing::completion_cost(m, s.tree, x, ctx);
      } else {
        ctx[x] = static_cast<Rotamer>(rng.below(m.domain(x)));
        hv = h.evaluate(SearchPosition::and_node(x), ctx);
        exact = gmec::testing::and_completion_cost(m, s.tree, x, ctx);
      }
      ++samples;
      if (hv > exact + 1e-9) ++violations;
    }
  }
  return {violations == 0,
          std::to_string(samples) + " samples, " + std::to_string(violations) + " violations"};
}

// Criterion 6: DEE keeps the GMEC energy; toy2 loses residue 0 rotamer 1.
Outcome dee_soundness() {
  int bad = 0;
  for (int idx = 0; idx < kSuiteSize; ++idx) {
    const EnergyModel m = gmec::testing::suite_instance(idx);
    const PruneResult r = goldstein_singles(m);
    const Conformation reduced = brute_force_min(r.reduced);
    const Energy truth = brute_force_min(m).energy;
    if (reduced.energy != truth || total_energy(m, r.expand(reduced.assignment)) != truth) ++bad;
  }
  const PruneResult toy = goldstein_singles(gmec::testing::toy2());
  const bool toy_ok =
      std::find(toy.kept[0].begin(), toy.kept[0].end(), 1) == toy.kept[0].end() &&
      std::find(toy.kept[0].begin(), toy.kept[0].end(), 0) != toy.kept[0].end();
  return {bad == 0 && toy_ok, std::to_string(bad) + " energy changes, toy2 residue 0 kept " +
                                  std::to_string(toy.kept[0].size()) + " rotamer(s)"};
}

// Criterion 7: AND decomposition beats a plain OR traversal.
Outcome decomposition() {
  int wins = 0;
  std::uint64_t first_aobb = 0, first_plain = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const EnergyModel m = gmec::testing::two_component_instance(seed);
    const Structure s(m);
    SearchOptions opts;
    opts.greedy_init = false;
    const Solution aobb = solve(m, s.tree, MiniBucketHeuristic::null(m, s.tree), opts);
    const PlainBnbResult plain = plain_bnb(m);
    if (seed == 0) {
      first_aobb = aobb.stats.expanded_and;
      first_plain = plain.stats.expanded_and;
    }
    if (aobb.stats.expanded_and < plain.stats.expanded_and &&
        aobb.conformation.energy == plain.conformation.energy)
      ++wins;
  }
  std::ostringstream d;
  d << wins << "/20 seeds; seed 0: " << first_aobb << " vs " << first_plain
    << " expanded AND nodes";
  return {wins == 20, d.str()};
}

// Criterion 8: the dropped-pair error bound holds.
Outcome sparsification_bound() {
  constexpr Energy kTol = 1e-12;
  int probes = 0, bad = 0, gmec_bad = 0;
  for (Energy lambda : {0.04, 0.5}) {
    for (int idx = 0; idx < 50; ++idx) {
      const EnergyModel m = gmec::testing::suite_instance(idx);
      const SparsifiedModel sp = build_interaction_graph(m, lambda);
      const Energy bound = sp.graph.dropped_error_bound();
      SplitMix64 rng(idx * 7 + 1);
      for (int t = 0; t < 1000; ++t) {
        const Assignment x = gmec::testing::random_assignment(m, rng);
        const Energy diff = total_energy(m, x) - total_energy(sp.model, x);
        ++probes;
        if (diff < -kTol || diff > bound + kTol) ++bad;
      }
      const PseudoTree tree = build_pseudo_tree(sp.graph);
      const Solution approx = solve(sp.model, tree, mini_bucket_elimination(sp.model, tree, 2));
      const Energy gap = total_energy(m, approx.conformation.assignment) - brute_force_min(m).energy;
      if (gap < 0.0 || gap > bound + kTol) ++gmec_bad;
    }
  }
  return {bad == 0 && gmec_bad == 0, std::to_string(probes) + " probes, " + std::to_string(bad) +
                                         " outside the bound, " + std::to_string(gmec_bad) +
                                         " GMEC gaps above the bound"};
}

// Criterion 9: every constructed pseudo-tree is valid; the worked tree is
// accepted and the sibling-edge tree rejected.
Outcome pseudo_tree_validity() {
  int trees = 0, invalid = 0;
  auto check = [&](const InteractionGraph& g) {
    ++trees;
    if (!validate_pseudo_tree(g, build_pseudo_tree(g, min_fill_ordering(g)))) ++invalid;
  };
  for (int idx = 0; idx < kSuiteSize; ++idx) {
    const EnergyModel m = gmec::testing::suite_instance(idx);
    check(InteractionGraph::of(m));
    for (Energy lambda : {0.04, 0.5}) check(build_interaction_graph(m, lambda).graph);
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    check(InteractionGraph::of(gmec::testing::two_component_instance(seed)));
  check(gmec::testing::six_residue_graph());
  const bool worked = validate_pseudo_tree(gmec::testing::six_residue_graph(), gmec::testing::six_residue_tree());
  const bool counter = validate_pseudo_tree(gmec::testing::six_residue_graph(),
                                            PseudoTree::from_parents({-1, 0, 0, 1, 2, 3}));
  std::ostringstream d;
  d << trees << " trees, " << invalid << " invalid; worked tree " << (worked ? "valid" : "INVALID")
    << ", counterexample " << (counter ? "ACCEPTED" : "rejected");
  return {invalid == 0 && worked && !counter, d.str()};
}

// Criterion 10: AND/OR versus OR tree size on the worked pseudo-tree.
Outcome count_fixture() {
  const std::vector<int> binary(6, 2);
  const auto [ors, ands] = count_full_tree(gmec::testing::six_residue_tree(), binary);
  const std::uint64_t plain = count_or_tree(binary);
  std::ostringstream d;
  d << ors << " OR + " << ands << " AND nodes vs " << plain << " plain OR nodes";
  return {ors == 27 && ands == 54 && plain == 126 && ors + ands < plain, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"GMEC oracle equivalence", gmec_oracle_equivalence},
      {"k-best oracle equivalence", kbest_oracle_equivalence},
      {"AND-merge fixture", merge_fixture},
      {"bucket elimination exactness", bucket_exactness},
      {"heuristic admissibility", admissibility},
      {"DEE soundness", dee_soundness},
      {"AND/OR decomposition", decomposition},
      {"sparsification bound", sparsification_bound},
      {"pseudo-tree validity", pseudo_tree_validity},
      {"AND/OR tree size", count_fixture},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %2zu %s: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first, o.detail.c_str());
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
