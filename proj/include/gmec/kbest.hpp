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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include "gmec/graph.hpp"
#include "gmec/heuristic.hpp"
#include "gmec/model.hpp"
#include "gmec/search.hpp"

namespace gmec {

// ---------------------------------------------------------------------------
// Value-vector merges
// ---------------------------------------------------------------------------

struct MergeOrResult {
  std::vector<Energy> values;
  /// (child, position in that child's vector) for each value.
  std::vector<std::pair<std::size_t, std::size_t>> sources;
};

/// k smallest of { edge_c + v_i(c) } over all children c and positions i.
/// Equal values keep (child, i) order.
inline MergeOrResult merge_or(const std::vector<std::pair<Energy, std::vector<Energy>>>& children,
                              std::size_t k) {
  struct Item {
    Energy value;
    std::size_t child, pos;
  };
  std::vector<Item> items;
  for (std::size_t c = 0; c < children.size(); ++c)
    for (std::size_t i = 0; i < children[c].second.size(); ++i)
      items.push_back({children[c].first + children[c].second[i], c, i});
  std::stable_sort(items.begin(), items.end(),
                   [](const Item& a, const Item& b) { return a.value < b.value; });
  if (items.size() > k) items.resize(k);
  MergeOrResult out;
  for (const auto& it : items) {
    out.values.push_back(it.value);
    out.sources.emplace_back(it.child, it.pos);
  }
  return out;
}

struct MergeAndStats {
  std::size_t pops = 0;
  std::size_t pushes = 0;
};

struct MergeAndResult {
  std::vector<Energy> values;
  /// 0-based index sequence (one index per child) behind each value.
  std::vector<std::vector<std::size_t>> sequences;
  MergeAndStats stats;
};

/// k best sums taking one value from each of the t sorted child vectors.
///
/// Priority-queue merge: push the all-zero index sequence, then k times pop
/// the minimum-sum sequence, emit it, and push its t successors (one index
/// incremented, skipping indices past a child's length). A seen-set keeps a
/// sequence reachable from several parents from being queued twice. Queue
/// ties are broken by the lexicographically smaller sequence. At most k pops
/// and k*t + 1 pushes.
inline MergeAndResult merge_and(const std::vector<std::vector<Energy>>& children, std::size_t k) {
  MergeAndResult out;
  const std::size_t t = children.size();
  if (k == 0) return out;
  for (const auto& c : children)
    if (c.empty()) return out;

  using Seq = std::vector<std::size_t>;
  auto sum_of = [&](const Seq& b) {
    Energy s = 0.0;
    for (std::size_t j = 0; j < t; ++j) s += children[j][b[j]];
    return s;
  };
  using Elem = std::pair<Energy, Seq>;
  std::priority_queue<Elem, std::vector<Elem>, std::greater<>> queue;
  std::set<Seq> seen;

  Seq start(t, 0);
  queue.emplace(sum_of(start), start);
  seen.insert(start);
  ++out.stats.pushes;

  for (std::size_t i = 0; i < k && !queue.empty(); ++i) {
    auto [value, b] = queue.top();
    queue.pop();
    ++out.stats.pops;
    for (std::size_t j = 0; j < t; ++j) {
      if (b[j] + 1 >= children[j].size()) continue;
      Seq next = b;
      ++next[j];
      if (!seen.insert(next).second) continue;
      queue.emplace(sum_of(next), next);
      ++out.stats.pushes;
    }
    out.values.push_back(value);
    out.sequences.push_back(std::move(b));
  }
  return out;
}

// ---------------------------------------------------------------------------
// k-best AND/OR search
// ---------------------------------------------------------------------------

struct KBestList {
  /// Sorted by (energy, assignment); energies are canonical totals.
  std::vector<Conformation> conformations;
  SearchStats stats;
  MergeAndStats merge_stats;  ///< summed over every AND merge
};

namespace detail {

class KBestSearch {
 public:
  struct Entry {
    Energy value;
    std::vector<Rotamer> sub;  ///< subtree assignment in preorder
  };
  using Vec = std::vector<Entry>;

  KBestSearch(const EnergyModel& model, const PseudoTree& tree, const MiniBucketHeuristic& h,
              std::size_t k, Energy delta, bool prune)
      : model_(model), tree_(tree), h_(h), index_(model, tree), k_(k), delta_(delta),
        prune_(prune), ctx_(model.size(), -1) {}

  KBestList run(const std::optional<Conformation>& incumbent) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& roots = tree_.roots();
    const std::size_t nc = roots.size();

    // Incumbent split per component, in node-value form.
    std::vector<Energy> inc_parts(nc, kInfinity);
    Energy global = kInfinity;
    if (incumbent) {
      check_assignment(model_, incumbent->assignment);
      for (std::size_t c = 0; c < nc; ++c)
        inc_parts[c] = component_value(roots[c], incumbent->assignment);
      Energy u1 = model_.e0();
      for (Energy v : inc_parts) u1 += v;
      stats_.incumbent_trace.push_back(u1);
      slack_ = 1e-9 * (1.0 + std::abs(u1));
      // Prune above min(U_1 + delta, U_k); only one incumbent is known, so
      // U_k is finite only for k = 1.
      global = k_ == 1 ? u1 : u1 + delta_;
    }

    std::vector<Energy> root_h(nc);
    for (std::size_t c = 0; c < nc; ++c) root_h[c] = h_.or_bound(roots[c], ctx_);

    std::vector<Vec> comps(nc);
    Energy done = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      Energy rest = 0.0;
      for (std::size_t j = c + 1; j < nc; ++j) rest += root_h[j];
      const Energy threshold =
          prune_ ? global - model_.e0() - done - rest + slack_ : kInfinity;
      comps[c] = solve_or(roots[c], threshold);
      if (comps[c].empty() && incumbent) {
        Entry e{inc_parts[c], {}};
        for (Residue v : index_.subtree[roots[c]]) e.sub.push_back(incumbent->assignment[v]);
        comps[c].push_back(std::move(e));
      }
      if (comps[c].empty()) break;  // nothing below threshold anywhere
      done += comps[c].front().value;
    }

    KBestList out;
    bool complete = true;
    for (const auto& v : comps) complete = complete && !v.empty();
    if (complete) {
      std::vector<std::vector<Energy>> values(nc);
      for (std::size_t c = 0; c < nc; ++c)
        for (const auto& e : comps[c]) values[c].push_back(e.value);
      const auto merged = merge_and(values, k_);
      add_merge_stats(merged.stats);
      for (const auto& seq : merged.sequences) {
        Assignment asg(model_.size(), 0);
        for (std::size_t c = 0; c < nc; ++c) {
          const auto& sub = comps[c][seq[c]].sub;
          const auto& nodes = index_.subtree[roots[c]];
          for (std::size_t p = 0; p < nodes.size(); ++p) asg[nodes[p]] = sub[p];
        }
        out.conformations.push_back(make_conformation(model_, std::move(asg)));
      }
    }
    std::sort(out.conformations.begin(), out.conformations.end(),
              [](const Conformation& a, const Conformation& b) {
                if (a.energy != b.energy) return a.energy < b.energy;
                return a.assignment < b.assignment;
              });
    if (!out.conformations.empty()) {
      const Energy cutoff = out.conformations.front().energy + delta_;
      std::erase_if(out.conformations, [&](const Conformation& c) { return c.energy > cutoff; });
    }
    if (out.conformations.size() > k_) out.conformations.resize(k_);
    if (!out.conformations.empty() &&
        (stats_.incumbent_trace.empty() ||
         out.conformations.front().energy < stats_.incumbent_trace.back()))
      stats_.incumbent_trace.push_back(out.conformations.front().energy);

    stats_.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    out.stats = std::move(stats_);
    out.merge_stats = merge_stats_;
    return out;
  }

 private:
  struct Candidate {
    Rotamer rotamer;
    Energy edge;
    Energy bound;
  };

  void add_merge_stats(const MergeAndStats& s) {
    merge_stats_.pops += s.pops;
    merge_stats_.pushes += s.pushes;
  }

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

  /// Up to k best values of the OR node x that do not exceed `threshold`,
  /// further cut by the node's own k-th value and its best value + delta.
  Vec solve_or(Residue x, Energy threshold) {
    ++stats_.expanded_or;
    const int d = model_.domain(x);
    std::vector<Candidate> cands;
    for (Rotamer r = 0; r < d; ++r) {
      ctx_[x] = r;
      cands.push_back({r, index_.edge(model_, x, ctx_), h_.and_bound(x, ctx_)});
      ++stats_.heuristic_evals;
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      return a.edge + a.bound < b.edge + b.bound;
    });

    Vec acc;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const auto& c = cands[i];
      Energy limit = threshold;
      if (prune_ && !acc.empty()) {
        limit = std::min(limit, acc.front().value + delta_ + slack_);
        if (acc.size() == k_) limit = std::min(limit, acc.back().value);
      }
      if (prune_ && c.edge + c.bound > limit) {
        stats_.pruned += cands.size() - i;
        break;
      }
      ctx_[x] = c.rotamer;
      Vec child = solve_and(x, limit - c.edge);
      if (child.empty()) continue;

      std::vector<std::pair<Energy, std::vector<Energy>>> lists(2);
      lists[0].first = 0.0;
      for (const auto& e : acc) lists[0].second.push_back(e.value);
      lists[1].first = c.edge;
      for (const auto& e : child) lists[1].second.push_back(e.value);
      const auto merged = merge_or(lists, k_);
      Vec next;
      next.reserve(merged.values.size());
      for (std::size_t m = 0; m < merged.values.size(); ++m) {
        const auto [src, pos] = merged.sources[m];
        if (src == 0) {
          next.push_back(std::move(acc[pos]));
        } else {
          Entry e{merged.values[m], {}};
          e.sub.reserve(child[pos].sub.size() + 1);
          e.sub.push_back(c.rotamer);
          e.sub.insert(e.sub.end(), child[pos].sub.begin(), child[pos].sub.end());
          next.push_back(std::move(e));
        }
      }
      acc = std::move(next);
    }
    ctx_[x] = -1;
    if (prune_ && !acc.empty()) {
      const Energy cut = std::min(threshold, acc.front().value + delta_ + slack_);
      std::erase_if(acc, [&](const Entry& e) { return e.value > cut; });
    }
    return acc;
  }

  /// Up to k best values below the AND node (x fixed) not exceeding
  /// `threshold`; sub-assignments cover x's children subtrees in order.
  Vec solve_and(Residue x, Energy threshold) {
    ++stats_.expanded_and;
    const auto& kids = tree_.children(x);
    if (kids.empty()) {
      if (prune_ && 0.0 > threshold) return {};
      return {Entry{0.0, {}}};
    }
    const std::size_t m = kids.size();
    std::vector<Energy> hs(m), suffix(m + 1, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      hs[j] = h_.or_bound(kids[j], ctx_);
      ++stats_.heuristic_evals;
    }
    for (std::size_t j = m; j-- > 0;) suffix[j] = suffix[j + 1] + hs[j];

    std::vector<Vec> vecs;
    vecs.reserve(m);
    Energy best_sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const Energy child_threshold = prune_ ? threshold - best_sum - suffix[j + 1] : kInfinity;
      if (prune_ && hs[j] > child_threshold) {
        ++stats_.pruned;
        return {};
      }
      Vec v = solve_or(kids[j], child_threshold);
      if (v.empty()) return {};
      best_sum += v.front().value;
      vecs.push_back(std::move(v));
    }

    std::vector<std::vector<Energy>> values(m);
    for (std::size_t j = 0; j < m; ++j)
      for (const auto& e : vecs[j]) values[j].push_back(e.value);
    const auto merged = merge_and(values, k_);
    add_merge_stats(merged.stats);
    Vec out;
    for (std::size_t p = 0; p < merged.values.size(); ++p) {
      if (prune_ && merged.values[p] > threshold) break;
      Entry e{merged.values[p], {}};
      for (std::size_t j = 0; j < m; ++j) {
        const auto& sub = vecs[j][merged.sequences[p][j]].sub;
        e.sub.insert(e.sub.end(), sub.begin(), sub.end());
      }
      out.push_back(std::move(e));
    }
    return out;
  }

  const EnergyModel& model_;
  const PseudoTree& tree_;
  const MiniBucketHeuristic& h_;
  TreeIndex index_;
  std::size_t k_;
  Energy delta_;
  bool prune_;
  Energy slack_ = 1e-9;
  std::vector<Rotamer> ctx_;
  SearchStats stats_;
  MergeAndStats merge_stats_;
};

}  // namespace detail

/// The k best conformations whose energy is within `delta` of the GMEC
/// (delta may be +inf), sorted by (energy, assignment), all distinct.
///
/// Depth-first AND/OR search propagating up to k values per node: OR nodes
/// merge their children by sorting, AND nodes by the priority-queue merge.
/// A subproblem is dropped only when its lower bound exceeds the smallest
/// of: the incumbent + delta, the k-th best value already known for the
/// same OR node, or that node's best value + delta. Thresholds carry a
/// relative slack of 1e-9 so that rounding never drops a qualifying
/// conformation; the cutoff itself is applied to canonical energies.
inline KBestList kbest_solve(const EnergyModel& model, const PseudoTree& tree,
                             const MiniBucketHeuristic& heuristic, std::size_t k, Energy delta,
                             const SearchOptions& options = {}) {
  if (k == 0) throw InvalidArgument("k must be at least 1");
  if (!(delta >= 0.0)) throw InvalidArgument("delta must be nonnegative (or +inf)");
  detail::check_inputs(model, tree, heuristic, options.prune);
  std::optional<Conformation> incumbent = options.initial_incumbent;
  if (!incumbent && options.greedy_init) incumbent = greedy_initial(model, tree, heuristic);
  detail::KBestSearch search(model, tree, heuristic, k, delta, options.prune);
  return search.run(incumbent);
}

}  // namespace gmec
