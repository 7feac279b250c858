// Copyright 2026 The gmec-aobb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gmec/graph.hpp"
#include "gmec/heuristic.hpp"
#include "gmec/model.hpp"

namespace gmec {

struct SearchStats {
  std::uint64_t expanded_or = 0;
  std::uint64_t expanded_and = 0;
  std::uint64_t pruned = 0;
  std::uint64_t heuristic_evals = 0;
  double elapsed_ms = 0.0;
  /// Global incumbent energy (internal summation) after initialization and
  /// after every improvement. Non-increasing.
  std::vector<Energy> incumbent_trace;
};

struct Solution {
  Conformation conformation;
  /// e0 + v(root), accumulated along the AND/OR recursion. Equal to
  /// `solution_tree_value(conformation.assignment)`; equal to
  /// `conformation.energy` up to summation order.
  Energy search_value = kInfinity;
  SearchStats stats;
};

struct SearchOptions {
  /// Starting incumbent. When empty and `greedy_init` is set, the greedy
  /// descent provides it; otherwise the search starts from +inf.
  std::optional<Conformation> initial_incumbent;
  bool greedy_init = true;
  /// false disables every bound test (exhaustive AND/OR traversal).
  bool prune = true;
};

/// e(y) for the AND node (x, ctx[x]): self energy plus the pair terms to
/// x's tree ancestors, the latter added by ascending ancestor index.
inline Energy edge_cost(const EnergyModel& model, const PseudoTree& tree, Residue x,
                        std::span<const Rotamer> ctx) {
  Energy e = model.self(x, ctx[x]);
  for (const auto& [a, table] : model.neighbors(x))
    if (tree.is_ancestor(a, x)) e += model.pair_energy(x, ctx[x], a, ctx[a]);
  return e;
}

/// Node-value recursion over the solution tree of a full assignment:
/// v(AND) = sum of child OR values (in child order), v(OR) = e(y) + v(y),
/// result = e0 + sum over component roots.
inline Energy solution_tree_value(const EnergyModel& model, const PseudoTree& tree,
                                  std::span<const Rotamer> assignment) {
  check_assignment(model, assignment);
  // Post-order accumulation without recursion.
  const auto& pre = tree.order();
  std::vector<Energy> or_value(model.size(), 0.0);
  for (auto it = pre.rbegin(); it != pre.rend(); ++it) {
    const Residue x = *it;
    Energy acc = 0.0;
    for (Residue c : tree.children(x)) acc += or_value[c];
    or_value[x] = edge_cost(model, tree, x, assignment) + acc;
  }
  Energy total = model.e0();
  for (Residue r : tree.roots()) total += or_value[r];
  return total;
}

/// Sizes of the full (unpruned) AND/OR search tree: every residue x has
/// one OR node per assignment of its ancestors and d_x AND nodes under each.
/// The virtual root is not counted. Saturates at UINT64_MAX.
inline std::pair<std::uint64_t, std::uint64_t> count_full_tree(const PseudoTree& tree,
                                                               const std::vector<int>& domains) {
  auto mul = [](std::uint64_t a, std::uint64_t b) {
    return (b != 0 && a > UINT64_MAX / b) ? UINT64_MAX : a * b;
  };
  auto add = [](std::uint64_t a, std::uint64_t b) {
    return a > UINT64_MAX - b ? UINT64_MAX : a + b;
  };
  std::vector<std::uint64_t> contexts(tree.size(), 1);
  std::uint64_t ors = 0, ands = 0;
  for (Residue x : tree.order()) {
    const Residue p = tree.parent(x);
    contexts[x] = p < 0 ? 1 : mul(contexts[p], static_cast<std::uint64_t>(domains.at(p)));
    ors = add(ors, contexts[x]);
    ands = add(ands, mul(contexts[x], static_cast<std::uint64_t>(domains.at(x))));
  }
  return {ors, ands};
}

/// Node count of the plain OR search tree over residues 0..n-1 in order
/// (the empty root excluded): sum_i prod_{j<=i} d_j.
inline std::uint64_t count_or_tree(const std::vector<int>& domains) {
  std::uint64_t total = 0, level = 1;
  for (int d : domains) {
    level = level > UINT64_MAX / static_cast<std::uint64_t>(d) ? UINT64_MAX : level * d;
    total = total > UINT64_MAX - level ? UINT64_MAX : total + level;
  }
  return total;
}

/// One root-to-leaves descent: each residue, in tree preorder, takes the
/// rotamer minimizing e(y) + h(y) given its already fixed ancestors (ties to
/// the lowest index).
inline Conformation greedy_initial(const EnergyModel& model, const PseudoTree& tree,
                                   const MiniBucketHeuristic& heuristic) {
  Assignment asg(model.size(), 0);
  for (Residue x : tree.order()) {
    Energy best = kInfinity;
    Rotamer arg = 0;
    for (Rotamer r = 0; r < model.domain(x); ++r) {
      asg[x] = r;
      const Energy f = edge_cost(model, tree, x, asg) + heuristic.and_bound(x, asg);
      if (f < best) {
        best = f;
        arg = r;
      }
    }
    asg[x] = arg;
  }
  return make_conformation(model, std::move(asg));
}

namespace detail {

inline bool has_negative_entry(const EnergyModel& model) {
  for (int i = 0; i < model.size(); ++i)
    for (Energy v : model.self(i))
      if (v < 0.0) return true;
  for (const auto& t : model.pairs())
    for (Energy v : t.values)
      if (v < 0.0) return true;
  return false;
}

/// Precomputed per-node data shared by the single-best and k-best searches.
struct TreeIndex {
  /// Ancestors sharing a pair table with x, ascending residue index.
  std::vector<std::vector<Residue>> ancestor_pairs;
  /// Subtree of x in preorder.
  std::vector<std::vector<Residue>> subtree;

  TreeIndex(const EnergyModel& model, const PseudoTree& tree) {
    const int n = model.size();
    ancestor_pairs.resize(n);
    subtree.resize(n);
    for (Residue x = 0; x < n; ++x) {
      for (const auto& [a, table] : model.neighbors(x)) {
        if (tree.is_ancestor(a, x))
          ancestor_pairs[x].push_back(a);
        else if (!tree.is_ancestor(x, a))
          throw InvalidArgument("pseudo-tree is not valid for the model");
      }
      subtree[x] = tree.subtree(x);
    }
  }

  Energy edge(const EnergyModel& model, Residue x, std::span<const Rotamer> ctx) const {
    Energy e = model.self(x, ctx[x]);
    for (Residue a : ancestor_pairs[x]) e += model.pair_energy(x, ctx[x], a, ctx[a]);
    return e;
  }
};

inline void check_inputs(const EnergyModel& model, const PseudoTree& tree,
                         const MiniBucketHeuristic& heuristic, bool prune) {
  if (tree.size() != model.size())
    throw InvalidArgument("pseudo-tree size does not match the model");
  if (heuristic.size() != model.size())
    throw InvalidArgument("heuristic was built for a different model");
  if (prune && heuristic.is_null() && has_negative_entry(model))
    throw InvalidArgument("the null heuristic is only admissible for nonnegative energies");
}

/// Depth-first AND/OR branch-and-bound. Each OR call receives a budget: the
/// value its subtree must beat for the result to matter. It returns the
/// exact subtree value when that is below the budget, +inf otherwise.
class AndOrSearch {
 public:
  AndOrSearch(const EnergyModel& model, const PseudoTree& tree, const MiniBucketHeuristic& h,
              bool prune)
      : model_(model), tree_(tree), h_(h), index_(model, tree), prune_(prune),
        ctx_(model.size(), -1), out_(model.size(), 0) {}

  Solution run(const std::optional<Conformation>& incumbent) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& roots = tree_.roots();
    comp_values_.assign(roots.size(), kInfinity);
    if (incumbent) {
      check_assignment(model_, incumbent->assignment);
      for (std::size_t c = 0; c < roots.size(); ++c)
        comp_values_[c] = component_value(roots[c], incumbent->assignment);
      out_ = incumbent->assignment;
      record_trace();
    }

    for (std::size_t c = 0; c < roots.size(); ++c) {
      current_component_ = static_cast<int>(c);
      const Energy budget = prune_ ? comp_values_[c] : kInfinity;
      std::vector<Rotamer> saved;
      if (incumbent) {
        for (Residue v : index_.subtree[roots[c]]) saved.push_back(out_[v]);
      }
      const Energy v = solve_or(roots[c], budget);
      if (v < budget || (!prune_ && v < kInfinity)) {
        comp_values_[c] = v;
      } else {
        // Incumbent part stands.
        std::size_t k = 0;
        for (Residue u : index_.subtree[roots[c]]) out_[u] = saved[k++];
      }
    }
    current_component_ = -1;

    Solution sol;
    sol.search_value = model_.e0();
    for (Energy v : comp_values_) sol.search_value += v;
    sol.conformation = make_conformation(model_, out_);
    stats_.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    sol.stats = std::move(stats_);
    return sol;
  }

 private:
  struct Candidate {
    Rotamer rotamer;
    Energy edge;
    Energy bound;
  };

  Energy component_value(Residue root, std::span<const Rotamer> asg) const {
    const auto& sub = index_.subtree[root];
    std::vector<Energy> or_value(model_.size(), 0.0);
    for (auto it = sub.rbegin(); it != sub.rend(); ++it) {
      Energy acc = 0.0;
      for (Residue c : tree_.children(*it)) acc += or_value[c];
      or_value[*it] = index_.edge(model_, *it, asg) + acc;
    }
    return or_value[root];
  }

  void record_trace() {
    Energy total = model_.e0();
    for (Energy v : comp_values_) total += v;
    if (total < kInfinity) stats_.incumbent_trace.push_back(total);
  }

  Energy solve_or(Residue x, Energy budget) {
    ++stats_.expanded_or;
    const int d = model_.domain(x);
    std::vector<Candidate> cands;
    cands.reserve(d);
    for (Rotamer r = 0; r < d; ++r) {
      ctx_[x] = r;
      const Energy e = index_.edge(model_, x, ctx_);
      const Energy hv = h_.and_bound(x, ctx_);
      ++stats_.heuristic_evals;
      cands.push_back({r, e, hv});
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      return a.edge + a.bound < b.edge + b.bound;
    });

    const auto& sub = index_.subtree[x];
    std::vector<Rotamer> best_sub;
    Energy best = kInfinity;
    for (std::size_t k = 0; k < cands.size(); ++k) {
      const auto& c = cands[k];
      const Energy limit = prune_ ? std::min(budget, best) : kInfinity;
      if (prune_ && c.edge + c.bound >= limit) {
        // Candidates are sorted by bound; the rest fail too.
        stats_.pruned += cands.size() - k;
        break;
      }
      ctx_[x] = c.rotamer;
      const Energy v = solve_and(x, limit - c.edge);
      if (v == kInfinity) continue;
      const Energy total = c.edge + v;
      if (total < best && (!prune_ || total < limit)) {
        best = total;
        best_sub.clear();
        out_[x] = c.rotamer;
        for (Residue u : sub) best_sub.push_back(out_[u]);
        if (current_component_ >= 0 && x == tree_.roots()[current_component_] &&
            total < comp_values_[current_component_]) {
          const Energy prev = comp_values_[current_component_];
          comp_values_[current_component_] = total;
          record_trace();
          comp_values_[current_component_] = prev;
        }
      }
    }
    ctx_[x] = -1;
    if (best == kInfinity) return kInfinity;
    std::size_t k = 0;
    for (Residue u : sub) out_[u] = best_sub[k++];
    return best;
  }

  Energy solve_and(Residue x, Energy budget) {
    ++stats_.expanded_and;
    const auto& kids = tree_.children(x);
    if (kids.empty()) return (!prune_ || 0.0 < budget) ? 0.0 : kInfinity;
    const std::size_t m = kids.size();
    std::vector<Energy> suffix(m + 1, 0.0);
    std::vector<Energy> hs(m);
    for (std::size_t j = 0; j < m; ++j) {
      hs[j] = h_.or_bound(kids[j], ctx_);
      ++stats_.heuristic_evals;
    }
    for (std::size_t j = m; j-- > 0;) suffix[j] = suffix[j + 1] + hs[j];

    Energy acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const Energy child_budget = prune_ ? budget - acc - suffix[j + 1] : kInfinity;
      if (prune_ && hs[j] >= child_budget) {
        ++stats_.pruned;
        return kInfinity;
      }
      const Energy v = solve_or(kids[j], child_budget);
      if (v == kInfinity) return kInfinity;
      acc += v;
    }
    if (prune_ && !(acc < budget)) return kInfinity;
    return acc;
  }

  const EnergyModel& model_;
  const PseudoTree& tree_;
  const MiniBucketHeuristic& h_;
  TreeIndex index_;
  bool prune_;
  std::vector<Rotamer> ctx_;
  std::vector<Rotamer> out_;
  std::vector<Energy> comp_values_;
  int current_component_ = -1;
  SearchStats stats_;
};

}  // namespace detail

/// Exact AND/OR branch-and-bound for the GMEC.
///
/// OR nodes try their AND children by ascending e(y) + h(y); a child is
/// skipped once that bound meets or exceeds the best value the subproblem
/// must beat (derived from the incumbent, the values of completed siblings
/// and the heuristic of pending siblings). Memory is the active path plus
/// one subtree buffer per open OR node.
inline Solution solve(const EnergyModel& model, const PseudoTree& tree,
                      const MiniBucketHeuristic& heuristic, const SearchOptions& options = {}) {
  detail::check_inputs(model, tree, heuristic, options.prune);
  std::optional<Conformation> incumbent = options.initial_incumbent;
  if (!incumbent && options.greedy_init) incumbent = greedy_initial(model, tree, heuristic);
  detail::AndOrSearch search(model, tree, heuristic, options.prune);
  return search.run(incumbent);
}

}  // namespace gmec
