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

#include <chrono>
#include <optional>
#include <utility>

#include "gmec/graph.hpp"
#include "gmec/heuristic.hpp"
#include "gmec/kbest.hpp"
#include "gmec/model.hpp"
#include "gmec/pruning.hpp"
#include "gmec/search.hpp"

namespace gmec {

struct PipelineConfig {
  bool dee = true;
  Energy lambda = 0.0;
  std::optional<int> ibound;  ///< empty = choose from the memory cap
  std::size_t memory_cap = kDefaultMemoryCap;
  bool prune = true;
};

/// Everything computed before search: optional DEE, optional
/// sparsification, ordering, pseudo-tree and heuristic.
struct Pipeline {
  EnergyModel original;
  std::optional<PruneResult> dee;
  SparsifiedModel sparse;  ///< the model actually searched
  EliminationOrdering ordering;
  PseudoTree tree;
  MiniBucketHeuristic heuristic;
  double init_ms = 0.0;

  const EnergyModel& searched() const { return sparse.model; }

  /// Assignment of the searched model in original rotamer indices.
  Assignment to_original(std::span<const Rotamer> asg) const {
    if (dee) return dee->expand(asg);
    return Assignment(asg.begin(), asg.end());
  }

  Conformation to_original(const Conformation& c) const {
    return make_conformation(original, to_original(c.assignment));
  }
};

inline Pipeline prepare(EnergyModel model, const PipelineConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  Pipeline p;
  p.original = std::move(model);
  if (config.dee) p.dee = goldstein_singles(p.original);
  p.sparse = build_interaction_graph(p.dee ? p.dee->reduced : p.original, config.lambda);
  p.ordering = min_fill_ordering(p.sparse.graph);
  p.tree = build_pseudo_tree(p.sparse.graph, p.ordering);
  const int ib = config.ibound ? *config.ibound
                               : choose_ibound(p.sparse.model, p.tree, config.memory_cap);
  p.heuristic = mini_bucket_elimination(p.sparse.model, p.tree, ib, config.memory_cap);
  p.init_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return p;
}

}  // namespace gmec
