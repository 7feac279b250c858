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
#include <stdexcept>
#include <utility>
#include <vector>

#include "gmec/model.hpp"

namespace gmec {

/// Residue interaction network. `edges` holds (i, j) with i < j, sorted.
class InteractionGraph {
 public:
  InteractionGraph() = default;

  InteractionGraph(int n, std::vector<std::pair<Residue, Residue>> edges,
                   Energy dropped_error_bound = 0.0)
      : n_(n), edges_(std::move(edges)), dropped_error_bound_(dropped_error_bound), adj_(n) {
    for (auto& [a, b] : edges_) {
      if (a > b) std::swap(a, b);
      if (a < 0 || a == b || b >= n_)
        throw InvalidPair("graph edge (" + std::to_string(a) + ", " + std::to_string(b) +
                          ") out of range");
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    for (auto [a, b] : edges_) {
      adj_[a].push_back(b);
      adj_[b].push_back(a);
    }
    for (auto& list : adj_) std::sort(list.begin(), list.end());
  }

  /// Graph with one edge per present pair table of `model`.
  static InteractionGraph of(const EnergyModel& model) {
    std::vector<std::pair<Residue, Residue>> edges;
    for (const auto& t : model.pairs()) edges.emplace_back(t.i, t.j);
    return InteractionGraph(model.size(), std::move(edges));
  }

  int size() const noexcept { return n_; }
  const std::vector<std::pair<Residue, Residue>>& edges() const noexcept { return edges_; }
  const std::vector<Residue>& neighbors(Residue v) const { return adj_.at(v); }
  Energy dropped_error_bound() const noexcept { return dropped_error_bound_; }

  bool has_edge(Residue a, Residue b) const {
    const auto& list = adj_.at(a);
    return std::binary_search(list.begin(), list.end(), b);
  }

 private:
  int n_ = 0;
  std::vector<std::pair<Residue, Residue>> edges_;
  Energy dropped_error_bound_ = 0.0;
  std::vector<std::vector<Residue>> adj_;
};

struct SparsifiedModel {
  InteractionGraph graph;
  EnergyModel model;
};

/// Keeps the pair (i, j) iff its table range max - min exceeds `lambda`.
/// A dropped table's minimum is folded into e0 (so the sparsified energy
/// never exceeds the original) and its range is added to the graph's
/// `dropped_error_bound`. Folding happens in ascending (i, j) order.
inline SparsifiedModel build_interaction_graph(const EnergyModel& model, Energy lambda) {
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be nonnegative");
  Energy e0 = model.e0();
  Energy bound = 0.0;
  std::vector<PairTable> kept;
  std::vector<std::pair<Residue, Residue>> edges;
  for (const auto& t : model.pairs()) {
    const auto [lo, hi] = pair_range(model, t.i, t.j);
    if (hi - lo > lambda) {
      kept.push_back(t);
      edges.emplace_back(t.i, t.j);
    } else {
      e0 += lo;
      bound += hi - lo;
    }
  }
  std::vector<std::vector<Energy>> self(model.size());
  for (int i = 0; i < model.size(); ++i)
    self[i].assign(model.self(i).begin(), model.self(i).end());
  return {InteractionGraph(model.size(), std::move(edges), bound),
          EnergyModel(model.domains(), e0, std::move(self), std::move(kept))};
}

// ---------------------------------------------------------------------------
// Elimination orderings
// ---------------------------------------------------------------------------

/// `order[0]` is eliminated first.
struct EliminationOrdering {
  std::vector<Residue> order;
  int induced_width = 0;
};

namespace detail {

/// Adjacency matrix of `graph` with the fill edges of eliminating along
/// `order` added. Also returns the induced width of the ordering.
inline std::pair<std::vector<std::vector<char>>, int> triangulate(
    const InteractionGraph& graph, const std::vector<Residue>& order) {
  const int n = graph.size();
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (auto [a, b] : graph.edges()) adj[a][b] = adj[b][a] = 1;
  std::vector<char> gone(n, 0);
  int width = 0;
  std::vector<Residue> live;
  for (Residue v : order) {
    live.clear();
    for (Residue u = 0; u < n; ++u)
      if (!gone[u] && adj[v][u]) live.push_back(u);
    width = std::max(width, static_cast<int>(live.size()));
    for (std::size_t a = 0; a < live.size(); ++a)
      for (std::size_t b = a + 1; b < live.size(); ++b)
        adj[live[a]][live[b]] = adj[live[b]][live[a]] = 1;
    gone[v] = 1;
  }
  return {std::move(adj), width};
}

inline void check_permutation(const std::vector<Residue>& order, int n) {
  if (static_cast<int>(order.size()) != n)
    throw InvalidArgument("ordering length does not match graph size");
  std::vector<char> seen(n, 0);
  for (Residue v : order) {
    if (v < 0 || v >= n || seen[v]) throw InvalidArgument("ordering is not a permutation");
    seen[v] = 1;
  }
}

}  // namespace detail

/// Induced width of eliminating `graph` along `order`.
inline int induced_width(const InteractionGraph& graph, const std::vector<Residue>& order) {
  detail::check_permutation(order, graph.size());
  return detail::triangulate(graph, order).second;
}

/// Greedy min-fill: repeatedly eliminates the node whose elimination adds the
/// fewest fill edges, ties to the lowest index.
inline EliminationOrdering min_fill_ordering(const InteractionGraph& graph) {
  const int n = graph.size();
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (auto [a, b] : graph.edges()) adj[a][b] = adj[b][a] = 1;
  std::vector<char> gone(n, 0);
  EliminationOrdering result;
  result.order.reserve(n);
  std::vector<Residue> live;

  auto live_neighbors = [&](Residue v) {
    live.clear();
    for (Residue u = 0; u < n; ++u)
      if (!gone[u] && adj[v][u]) live.push_back(u);
  };

  for (int step = 0; step < n; ++step) {
    Residue best = -1;
    long long best_fill = 0;
    for (Residue v = 0; v < n; ++v) {
      if (gone[v]) continue;
      live_neighbors(v);
      long long fill = 0;
      for (std::size_t a = 0; a < live.size(); ++a)
        for (std::size_t b = a + 1; b < live.size(); ++b)
          if (!adj[live[a]][live[b]]) ++fill;
      if (best < 0 || fill < best_fill) {
        best = v;
        best_fill = fill;
      }
    }
    live_neighbors(best);
    result.induced_width = std::max(result.induced_width, static_cast<int>(live.size()));
    for (std::size_t a = 0; a < live.size(); ++a)
      for (std::size_t b = a + 1; b < live.size(); ++b)
        adj[live[a]][live[b]] = adj[live[b]][live[a]] = 1;
    gone[best] = 1;
    result.order.push_back(best);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Pseudo-trees
// ---------------------------------------------------------------------------

/// Rooted spanning forest over the residues. Component roots have parent -1
/// and hang off an implicit virtual root, so disconnected components are
/// independent subtrees. Children lists are ascending.
class PseudoTree {
 public:
  PseudoTree() = default;

  /// Builds the tree from parent links (-1 marks a component root). Throws
  /// `InvalidArgument` if the links do not form a forest over all nodes.
  static PseudoTree from_parents(std::vector<Residue> parent) {
    PseudoTree t;
    const int n = static_cast<int>(parent.size());
    t.parent_ = std::move(parent);
    t.children_.assign(n, {});
    for (Residue v = 0; v < n; ++v) {
      const Residue p = t.parent_[v];
      if (p < -1 || p >= n || p == v) throw InvalidArgument("bad parent link");
      if (p == -1)
        t.roots_.push_back(v);
      else
        t.children_[p].push_back(v);
    }
    t.level_.assign(n, 0);
    t.order_.reserve(n);
    std::vector<std::pair<Residue, int>> stack;
    for (auto it = t.roots_.rbegin(); it != t.roots_.rend(); ++it) stack.emplace_back(*it, 1);
    while (!stack.empty()) {
      auto [v, lvl] = stack.back();
      stack.pop_back();
      t.level_[v] = lvl;
      t.depth_ = std::max(t.depth_, lvl);
      t.order_.push_back(v);
      for (auto c = t.children_[v].rbegin(); c != t.children_[v].rend(); ++c)
        stack.emplace_back(*c, lvl + 1);
    }
    if (static_cast<int>(t.order_.size()) != n)
      throw InvalidArgument("parent links contain a cycle");
    return t;
  }

  int size() const noexcept { return static_cast<int>(parent_.size()); }
  Residue parent(Residue v) const { return parent_.at(v); }
  const std::vector<Residue>& parents() const noexcept { return parent_; }
  const std::vector<Residue>& children(Residue v) const { return children_.at(v); }
  /// Component roots, i.e. children of the virtual root.
  const std::vector<Residue>& roots() const noexcept { return roots_; }
  /// Depth-first preorder (components in root order, children ascending).
  const std::vector<Residue>& order() const noexcept { return order_; }
  /// Node count of the longest root-to-leaf path.
  int depth() const noexcept { return depth_; }
  /// 1 for component roots.
  int level(Residue v) const { return level_.at(v); }

  bool is_ancestor(Residue anc, Residue v) const {
    for (Residue u = parent_.at(v); u != -1; u = parent_[u])
      if (u == anc) return true;
    return false;
  }

  /// Strict ancestors of v, nearest first.
  std::vector<Residue> ancestors(Residue v) const {
    std::vector<Residue> out;
    for (Residue u = parent_.at(v); u != -1; u = parent_[u]) out.push_back(u);
    return out;
  }

  /// Nodes of the subtree rooted at v in preorder (v first).
  std::vector<Residue> subtree(Residue v) const {
    std::vector<Residue> out;
    std::vector<Residue> stack{v};
    while (!stack.empty()) {
      const Residue u = stack.back();
      stack.pop_back();
      out.push_back(u);
      for (auto c = children_[u].rbegin(); c != children_[u].rend(); ++c) stack.push_back(*c);
    }
    return out;
  }

 private:
  std::vector<Residue> parent_;
  std::vector<std::vector<Residue>> children_;
  std::vector<Residue> roots_;
  std::vector<Residue> order_;
  std::vector<int> level_;
  int depth_ = 0;
};

/// True iff every graph edge joins a node to one of its tree ancestors.
inline bool validate_pseudo_tree(const InteractionGraph& graph, const PseudoTree& tree) {
  if (graph.size() != tree.size()) return false;
  for (auto [a, b] : graph.edges())
    if (!tree.is_ancestor(a, b) && !tree.is_ancestor(b, a)) return false;
  return true;
}

/// Elimination tree of the ordering: each node's parent is its neighbor in
/// the triangulated graph that is eliminated soonest after it. Nodes with no
/// later neighbor become component roots. Every edge of the triangulated
/// graph, and hence of `graph`, then joins ancestor and descendant, and the
/// bucket scopes of elimination along the tree are bounded by the ordering's
/// induced width.
inline PseudoTree build_pseudo_tree(const InteractionGraph& graph,
                                    const EliminationOrdering& ordering) {
  const int n = graph.size();
  detail::check_permutation(ordering.order, n);
  const auto [adj, width] = detail::triangulate(graph, ordering.order);
  std::vector<int> pos(n);
  for (int k = 0; k < n; ++k) pos[ordering.order[k]] = k;
  std::vector<Residue> parent(n, -1);
  for (Residue v = 0; v < n; ++v) {
    int best = n;
    for (Residue u = 0; u < n; ++u)
      if (adj[v][u] && pos[u] > pos[v] && pos[u] < best) best = pos[u];
    if (best < n) parent[v] = ordering.order[best];
  }
  PseudoTree tree = PseudoTree::from_parents(std::move(parent));
  if (!validate_pseudo_tree(graph, tree))
    throw std::logic_error("elimination tree violates the pseudo-tree property");
  return tree;
}

/// Convenience: min-fill ordering followed by its elimination tree.
inline PseudoTree build_pseudo_tree(const InteractionGraph& graph) {
  return build_pseudo_tree(graph, min_fill_ordering(graph));
}

}  // namespace gmec
