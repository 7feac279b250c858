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

#include <vector>

#include "gmec/model.hpp"

namespace gmec {

/// Outcome of dead-end elimination. `kept[i]` lists the surviving original
/// rotamer indices of residue i in ascending order; `reduced` is the model
/// restricted to them.
struct PruneResult {
  std::vector<std::vector<Rotamer>> kept;
  EnergyModel reduced;
  int rounds = 0;

  /// Maps an assignment of `reduced` back to original rotamer indices.
  Assignment expand(std::span<const Rotamer> reduced_assignment) const {
    Assignment out(reduced_assignment.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = kept[i].at(reduced_assignment[i]);
    return out;
  }
};

/// Model over the rotamer subsets `kept`; pair tables present in `model`
/// stay present (possibly shrunk).
inline EnergyModel restrict_model(const EnergyModel& model,
                                  const std::vector<std::vector<Rotamer>>& kept) {
  const int n = model.size();
  if (kept.size() != static_cast<std::size_t>(n))
    throw InvalidArgument("kept list count does not match residue count");
  for (int i = 0; i < n; ++i)
    for (std::size_t k = 0; k < kept[i].size(); ++k)
      if (kept[i][k] < 0 || kept[i][k] >= model.domain(i) || (k > 0 && kept[i][k] <= kept[i][k - 1]))
        throw InvalidArgument("kept rotamers of residue " + std::to_string(i) +
                              " must be ascending and within the domain");
  std::vector<int> domains(n);
  std::vector<std::vector<Energy>> self(n);
  for (int i = 0; i < n; ++i) {
    domains[i] = static_cast<int>(kept[i].size());
    for (Rotamer r : kept[i]) self[i].push_back(model.self(i, r));
  }
  std::vector<PairTable> pairs;
  pairs.reserve(model.pairs().size());
  for (const auto& t : model.pairs()) {
    PairTable p{t.i, t.j, {}};
    p.values.reserve(kept[t.i].size() * kept[t.j].size());
    for (Rotamer a : kept[t.i])
      for (Rotamer b : kept[t.j])
        p.values.push_back(t.values[static_cast<std::size_t>(a) * model.domain(t.j) + b]);
    pairs.push_back(std::move(p));
  }
  return EnergyModel(std::move(domains), model.e0(), std::move(self), std::move(pairs));
}

/// Goldstein singles dead-end elimination, iterated to a fixpoint.
///
/// Rotamer r of residue i is removed when some surviving competitor t of
/// the same residue satisfies
///
///   self_i(r) - self_i(t) + sum_{j != i} min_{s in kept(j)} [E(r, s) - E(t, s)] > 0.
///
/// Removals take effect immediately. Scan order is residue ascending, then
/// rotamer ascending, then competitor ascending; a pass that removes nothing
/// ends the loop. Because a competitor must survive, the last rotamer of a
/// residue is never removed.
inline PruneResult goldstein_singles(const EnergyModel& model) {
  const int n = model.size();
  std::vector<std::vector<char>> alive(n);
  for (int i = 0; i < n; ++i) alive[i].assign(model.domain(i), 1);

  int rounds = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    ++rounds;
    for (int i = 0; i < n; ++i) {
      const int d = model.domain(i);
      const auto& nbrs = model.neighbors(i);
      for (Rotamer r = 0; r < d; ++r) {
        if (!alive[i][r]) continue;
        for (Rotamer t = 0; t < d; ++t) {
          if (t == r || !alive[i][t]) continue;
          Energy margin = model.self(i, r) - model.self(i, t);
          for (const auto& [j, table] : nbrs) {
            Energy best = kInfinity;
            for (Rotamer s = 0; s < model.domain(j); ++s) {
              if (!alive[j][s]) continue;
              const Energy diff = model.pair_energy(i, r, j, s) - model.pair_energy(i, t, j, s);
              if (diff < best) best = diff;
            }
            margin += best;
          }
          if (margin > 0.0) {
            alive[i][r] = 0;
            changed = true;
            break;
          }
        }
      }
    }
  }

  std::vector<std::vector<Rotamer>> kept(n);
  for (int i = 0; i < n; ++i)
    for (Rotamer r = 0; r < model.domain(i); ++r)
      if (alive[i][r]) kept[i].push_back(r);
  PruneResult result{kept, restrict_model(model, kept), rounds};
  return result;
}

}  // namespace gmec
