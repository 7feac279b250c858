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

// Ground-truth engines. They deliberately share no traversal code with the
// AND/OR search so that they can serve as independent cross-checks.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

#include "gmec/kbest.hpp"
#include "gmec/model.hpp"
#include "gmec/search.hpp"

namespace gmec {

inline constexpr double kDefaultEnumerationCap = 1e7;

namespace detail {

inline void check_enumeration_cap(const EnergyModel& model, double cap) {
  if (model.space_size() > cap)
    throw ResourceError("conformational space of " + std::to_string(model.space_size()) +
                        " exceeds the enumeration cap of " + std::to_string(cap));
}

/// Advances `asg` to the next assignment in lexicographic order (last
/// residue fastest). Returns false after the last one.
inline bool next_assignment(const EnergyModel& model, Assignment& asg) {
  for (int i = model.size() - 1; i >= 0; --i) {
    if (++asg[i] < model.domain(i)) return true;
    asg[i] = 0;
  }
  return false;
}

inline bool conformation_less(const Conformation& a, const Conformation& b) {
  if (a.energy != b.energy) return a.energy < b.energy;
  return a.assignment < b.assignment;
}

}  // namespace detail

/// Exhaustive minimum in lexicographic order; ties go to the
/// lexicographically smallest assignment.
inline Conformation brute_force_min(const EnergyModel& model,
                                    double cap = kDefaultEnumerationCap) {
  detail::check_enumeration_cap(model, cap);
  Assignment asg(model.size(), 0);
  Conformation best;
  do {
    const Energy e = total_energy(model, asg);
    if (e < best.energy) {
      best.energy = e;
      best.assignment = asg;
    }
  } while (detail::next_assignment(model, asg));
  return best;
}

/// Exhaustive k best within `delta` of the minimum, sorted by
/// (energy, assignment).
inline KBestList brute_force_topk(const EnergyModel& model, std::size_t k, Energy delta,
                                  double cap = kDefaultEnumerationCap) {
  if (k == 0) throw InvalidArgument("k must be at least 1");
  if (!(delta >= 0.0)) throw InvalidArgument("delta must be nonnegative (or +inf)");
  detail::check_enumeration_cap(model, cap);
  auto worse = [](const Conformation& a, const Conformation& b) {
    return detail::conformation_less(a, b);
  };
  // Max-heap of the k best seen so far.
  std::priority_queue<Conformation, std::vector<Conformation>, decltype(worse)> heap(worse);
  Assignment asg(model.size(), 0);
  do {
    Conformation c{asg, total_energy(model, asg)};
    if (heap.size() < k) {
      heap.push(std::move(c));
    } else if (detail::conformation_less(c, heap.top())) {
      heap.pop();
      heap.push(std::move(c));
    }
  } while (detail::next_assignment(model, asg));

  KBestList out;
  while (!heap.empty()) {
    out.conformations.push_back(heap.top());
    heap.pop();
  }
  std::reverse(out.conformations.begin(), out.conformations.end());
  const Energy cutoff = out.conformations.front().energy + delta;
  std::erase_if(out.conformations, [&](const Conformation& c) { return c.energy > cutoff; });
  return out;
}

struct PlainBnbOptions {
  /// Adds, for every unassigned residue, the cheapest way to place it
  /// against the assigned residues and the cheapest partner rotamer of each
  /// later unassigned residue. Without it the bound is the accumulated
  /// energy alone, which is admissible only for nonnegative energies.
  bool use_bound = false;
  std::optional<Conformation> initial_incumbent;
};

struct PlainBnbResult {
  Conformation conformation;
  SearchStats stats;
  /// Complete assignments generated (including ones rejected by the bound).
  std::uint64_t leaf_visits = 0;
};

/// Depth-first branch-and-bound over residues 0..n-1 with no decomposition.
/// A child is generated for every rotamer; it is discarded when its lower
/// bound (accumulated energy, plus the optional bound) meets or exceeds
/// the incumbent, otherwise it counts as expanded.
inline PlainBnbResult plain_bnb(const EnergyModel& model, const PlainBnbOptions& options = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = model.size();
  if (!options.use_bound && detail::has_negative_entry(model))
    throw InvalidArgument("accumulated-energy bound needs nonnegative energies");

  PlainBnbResult result;
  Energy incumbent = kInfinity;
  Assignment best;
  if (options.initial_incumbent) {
    check_assignment(model, options.initial_incumbent->assignment);
    incumbent = total_energy(model, options.initial_incumbent->assignment);
    best = options.initial_incumbent->assignment;
    result.stats.incumbent_trace.push_back(incumbent);
  }

  // min over s of E(i_r, j_s) for j > i, used by the optional bound.
  auto future_min = [&](int i, Rotamer r, int j) {
    Energy m = kInfinity;
    for (Rotamer s = 0; s < model.domain(j); ++s) m = std::min(m, model.pair_energy(i, r, j, s));
    return m;
  };
  Assignment asg(n, 0);
  auto bound_from = [&](int next) {
    Energy total = 0.0;
    for (int j = next; j < n; ++j) {
      Energy best_r = kInfinity;
      for (Rotamer r = 0; r < model.domain(j); ++r) {
        Energy v = model.self(j, r);
        for (int i = 0; i < next; ++i) v += model.pair_energy(i, asg[i], j, r);
        for (int l = j + 1; l < n; ++l)
          if (model.pair(j, l) != nullptr) v += future_min(j, r, l);
        best_r = std::min(best_r, v);
      }
      total += best_r;
    }
    return total;
  };

  // Explicit stack of (depth, next rotamer to try, accumulated energy).
  struct Frame {
    int depth;
    Rotamer next;
    Energy acc;
  };
  std::vector<Frame> stack;
  stack.push_back({0, 0, model.e0()});
  ++result.stats.expanded_or;
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.depth == n || f.next >= model.domain(f.depth)) {
      stack.pop_back();
      continue;
    }
    const int i = f.depth;
    const Rotamer r = f.next++;
    asg[i] = r;
    Energy acc = f.acc + model.self(i, r);
    for (int j = 0; j < i; ++j) acc += model.pair_energy(j, asg[j], i, r);
    const Energy lb = acc + (options.use_bound ? bound_from(i + 1) : 0.0);
    ++result.stats.heuristic_evals;
    if (i + 1 == n) ++result.leaf_visits;
    if (lb >= incumbent) {
      ++result.stats.pruned;
      continue;
    }
    ++result.stats.expanded_and;
    if (i + 1 == n) {
      const Energy e = total_energy(model, asg);
      if (e < incumbent) {
        incumbent = e;
        best = asg;
        result.stats.incumbent_trace.push_back(e);
      }
      continue;
    }
    ++result.stats.expanded_or;
    stack.push_back({i + 1, 0, acc});
  }
  result.conformation = {best, incumbent};
  result.stats.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace gmec
