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
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gmec/graph.hpp"
#include "gmec/model.hpp"

namespace gmec {

inline constexpr std::size_t kDefaultMemoryCap = std::size_t{512} << 20;

/// Unlimited i-bound: every bucket is a single mini-bucket.
inline constexpr int kExactIBound = 0;

/// A position in the AND/OR search space. OR positions name a residue
/// before its rotamer is chosen; AND positions name a residue with its
/// rotamer fixed (taken from the context). `kRoot` is the virtual root
/// above all component roots.
struct SearchPosition {
  enum class Kind { kRoot, kOr, kAnd };
  Kind kind = Kind::kRoot;
  Residue residue = -1;

  static SearchPosition root() { return {Kind::kRoot, -1}; }
  static SearchPosition or_node(Residue x) { return {Kind::kOr, x}; }
  static SearchPosition and_node(Residue x) { return {Kind::kAnd, x}; }
};

/// Splits the functions of one bucket into mini-buckets. Functions are
/// visited by decreasing scope size, ties broken by comparing the scopes
/// (each listed in descending residue order) lexicographically, larger
/// first; each goes into the first mini-bucket whose combined scope stays
/// within `i_bound` variables, or opens a new one. Returns, per mini-bucket,
/// the indices into `scopes` in placement order. `i_bound == kExactIBound`
/// yields a single mini-bucket.
inline std::vector<std::vector<std::size_t>> partition_mini_buckets(
    const std::vector<std::vector<Residue>>& scopes, int i_bound) {
  std::vector<std::vector<Residue>> keys(scopes.size());
  for (std::size_t f = 0; f < scopes.size(); ++f) {
    keys[f] = scopes[f];
    std::sort(keys[f].begin(), keys[f].end(), std::greater<>());
    keys[f].erase(std::unique(keys[f].begin(), keys[f].end()), keys[f].end());
  }
  std::vector<std::size_t> idx(scopes.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (keys[a].size() != keys[b].size()) return keys[a].size() > keys[b].size();
    return keys[a] > keys[b];
  });

  std::vector<std::vector<std::size_t>> parts;
  std::vector<std::vector<Residue>> unions;
  for (std::size_t f : idx) {
    bool placed = false;
    for (std::size_t m = 0; m < parts.size() && !placed; ++m) {
      std::vector<Residue> merged;
      std::set_union(unions[m].begin(), unions[m].end(), keys[f].rbegin(), keys[f].rend(),
                     std::back_inserter(merged));
      if (i_bound == kExactIBound || static_cast<int>(merged.size()) <= i_bound) {
        parts[m].push_back(f);
        unions[m] = std::move(merged);
        placed = true;
      }
    }
    if (!placed) {
      parts.push_back({f});
      unions.emplace_back(keys[f].rbegin(), keys[f].rend());
    }
  }
  return parts;
}

/// Mini-bucket elimination over a pseudo-tree.
///
/// Buckets are processed leaves first. The bucket of x holds x's self
/// table, the pair tables joining x to its ancestors, and every message
/// whose deepest scope variable is x. Each mini-bucket is minimized over x
/// independently, producing a message over the remaining (ancestor) scope,
/// which is placed in the bucket of its deepest variable, or at the virtual
/// root when the scope is empty.
///
/// The lower bound for an OR position x is the sum of all messages created
/// inside x's subtree that leave it (land on a strict ancestor of x or the
/// virtual root). For an AND position (x fixed) it is the sum of the OR
/// bounds of x's children. The finished object is immutable.
class MiniBucketHeuristic {
 public:
  struct Message {
    Residue bucket = -1;  ///< bucket that produced it
    Residue target = -1;  ///< bucket it was placed in; -1 = virtual root
    std::vector<Residue> scope;  ///< ascending
    std::vector<std::size_t> strides;
    std::vector<Energy> values;

    std::size_t index(std::span<const Rotamer> ctx) const {
      std::size_t k = 0;
      for (std::size_t s = 0; s < scope.size(); ++s) k += ctx[scope[s]] * strides[s];
      return k;
    }
    Energy at(std::span<const Rotamer> ctx) const { return values[index(ctx)]; }
  };

  /// Function slot of a bucket: x's self table, a pair table to an
  /// ancestor, or an incoming message.
  struct Function {
    enum class Kind { kSelf, kPair, kMessage };
    Kind kind = Kind::kSelf;
    Residue other = -1;  ///< ancestor for kPair
    int message = -1;    ///< index into messages() for kMessage
    std::vector<Residue> scope;
  };

  struct MiniBucket {
    std::vector<Function> functions;
    std::vector<Residue> scope;  ///< union, ascending, includes the bucket variable
    int message = -1;            ///< message it produced
  };

  MiniBucketHeuristic() = default;

  /// Runs mini-bucket elimination. Throws `InvalidArgument` if `tree` is
  /// not a valid pseudo-tree for `model` or i_bound is below 2, and
  /// `ResourceError` once the accumulated table memory would exceed
  /// `memory_cap` bytes.
  static MiniBucketHeuristic build(const EnergyModel& model, const PseudoTree& tree, int i_bound,
                                   std::size_t memory_cap = kDefaultMemoryCap) {
    return build_impl(model, tree, i_bound, memory_cap, true);
  }

  /// Partition and scopes of `build` without computing any table values;
  /// `memory_bytes()` of the result is the prediction (saturating).
  static MiniBucketHeuristic plan(const EnergyModel& model, const PseudoTree& tree, int i_bound) {
    return build_impl(model, tree, i_bound, SIZE_MAX, false);
  }

  /// Heuristic that bounds every subproblem by zero (valid only when all
  /// energies are nonnegative).
  static MiniBucketHeuristic null(const EnergyModel& model, const PseudoTree& tree) {
    MiniBucketHeuristic h;
    h.init_shape(model, tree);
    h.i_bound_ = -1;
    return h;
  }

  /// Residue count of the model it was built for.
  int size() const noexcept { return static_cast<int>(children_.size()); }
  int i_bound() const noexcept { return i_bound_; }
  bool is_null() const noexcept { return i_bound_ < 0; }
  std::size_t memory_bytes() const noexcept { return memory_bytes_; }
  /// Largest mini-bucket scope (including the bucket variable).
  int max_scope_size() const noexcept { return max_scope_; }
  const std::vector<Message>& messages() const noexcept { return messages_; }
  const std::vector<MiniBucket>& buckets(Residue x) const { return buckets_.at(x); }
  /// Messages counted by `or_bound(x, ...)`.
  const std::vector<int>& exit_messages(Residue x) const { return exits_.at(x); }

  /// Lower bound on the best subtree energy at OR position x (x's own self
  /// and ancestor pair terms included). Unchecked: every strict ancestor of
  /// x must be assigned in `ctx`.
  Energy or_bound(Residue x, std::span<const Rotamer> ctx) const {
    Energy h = 0.0;
    for (int m : exits_[x]) h += messages_[m].at(ctx);
    return h;
  }

  /// Lower bound on the energy below x once x is fixed to ctx[x].
  Energy and_bound(Residue x, std::span<const Rotamer> ctx) const {
    Energy h = 0.0;
    for (Residue c : children_[x]) h += or_bound(c, ctx);
    return h;
  }

  /// e0 plus every message that reaches the virtual root.
  Energy root_bound() const {
    Energy h = e0_;
    for (Residue r : roots_) h += or_bound(r, {});
    return h;
  }

  /// Checked evaluation. `ctx` has one entry per residue, -1 = unassigned.
  /// Throws `InvalidArgument` when a variable the bound depends on is
  /// unassigned.
  Energy evaluate(SearchPosition pos, std::span<const Rotamer> ctx) const {
    if (ctx.size() != children_.size())
      throw InvalidArgument("context length does not match the model");
    switch (pos.kind) {
      case SearchPosition::Kind::kRoot:
        return root_bound();
      case SearchPosition::Kind::kOr:
        require_assigned(exits_.at(pos.residue), ctx);
        return or_bound(pos.residue, ctx);
      case SearchPosition::Kind::kAnd:
        if (ctx[pos.residue] < 0)
          throw InvalidArgument("AND position needs its own residue assigned");
        for (Residue c : children_.at(pos.residue)) require_assigned(exits_[c], ctx);
        return and_bound(pos.residue, ctx);
    }
    return 0.0;
  }

  /// Sum of the bucket functions of x under `ctx` (x and its ancestors
  /// assigned), in mini-bucket order. Used for decoding.
  Energy bucket_sum(const EnergyModel& model, Residue x, std::span<const Rotamer> ctx) const {
    Energy s = 0.0;
    for (const auto& mb : buckets_[x])
      for (const auto& f : mb.functions) s += eval_function(model, x, f, ctx);
    return s;
  }

 private:
  void init_shape(const EnergyModel& model, const PseudoTree& tree) {
    const int n = model.size();
    if (tree.size() != n) throw InvalidArgument("pseudo-tree size does not match the model");
    for (const auto& t : model.pairs())
      if (!tree.is_ancestor(t.i, t.j) && !tree.is_ancestor(t.j, t.i))
        throw InvalidArgument("pseudo-tree is not valid for the model: pair (" +
                              std::to_string(t.i) + ", " + std::to_string(t.j) +
                              ") spans two branches");
    e0_ = model.e0();
    children_.resize(n);
    for (Residue v = 0; v < n; ++v) children_[v] = tree.children(v);
    roots_ = tree.roots();
    buckets_.assign(n, {});
    exits_.assign(n, {});
  }

  void require_assigned(const std::vector<int>& msgs, std::span<const Rotamer> ctx) const {
    for (int m : msgs)
      for (Residue v : messages_[m].scope)
        if (ctx[v] < 0)
          throw InvalidArgument("context leaves residue " + std::to_string(v) + " unassigned");
  }

  Energy eval_function(const EnergyModel& model, Residue x, const Function& f,
                       std::span<const Rotamer> ctx) const {
    switch (f.kind) {
      case Function::Kind::kSelf:
        return model.self(x, ctx[x]);
      case Function::Kind::kPair:
        return model.pair_energy(x, ctx[x], f.other, ctx[f.other]);
      case Function::Kind::kMessage:
        return messages_[f.message].at(ctx);
    }
    return 0.0;
  }

  static std::string scope_string(const std::vector<Residue>& scope) {
    std::ostringstream os;
    os << '{';
    for (std::size_t k = 0; k < scope.size(); ++k) os << (k ? "," : "") << scope[k];
    os << '}';
    return os.str();
  }

  static MiniBucketHeuristic build_impl(const EnergyModel& model, const PseudoTree& tree,
                                        int i_bound, std::size_t memory_cap, bool materialize) {
    if (i_bound != kExactIBound && i_bound < 2)
      throw InvalidArgument("i_bound must be at least 2");
    MiniBucketHeuristic h;
    h.init_shape(model, tree);
    h.i_bound_ = i_bound;
    const int n = model.size();

    std::vector<std::vector<int>> incoming(n);
    std::vector<Rotamer> asg(n, 0);
    const auto& pre = tree.order();

    for (auto it = pre.rbegin(); it != pre.rend(); ++it) {
      const Residue x = *it;
      std::vector<Function> fns;
      fns.push_back({Function::Kind::kSelf, -1, -1, {x}});
      for (const auto& [a, table] : model.neighbors(x))
        if (tree.is_ancestor(a, x)) fns.push_back({Function::Kind::kPair, a, -1, {std::min(a, x), std::max(a, x)}});
      for (int m : incoming[x]) fns.push_back({Function::Kind::kMessage, -1, m, h.messages_[m].scope});

      std::vector<std::vector<Residue>> scopes;
      scopes.reserve(fns.size());
      for (const auto& f : fns) scopes.push_back(f.scope);
      const auto parts = partition_mini_buckets(scopes, i_bound);

      for (const auto& part : parts) {
        MiniBucket mb;
        for (std::size_t f : part) {
          mb.functions.push_back(fns[f]);
          mb.scope.insert(mb.scope.end(), fns[f].scope.begin(), fns[f].scope.end());
        }
        std::sort(mb.scope.begin(), mb.scope.end());
        mb.scope.erase(std::unique(mb.scope.begin(), mb.scope.end()), mb.scope.end());
        h.max_scope_ = std::max(h.max_scope_, static_cast<int>(mb.scope.size()));

        Message msg;
        msg.bucket = x;
        for (Residue v : mb.scope)
          if (v != x) msg.scope.push_back(v);
        msg.strides.assign(msg.scope.size(), 1);
        std::size_t cells = 1;
        bool overflow = false;
        for (std::size_t s = msg.scope.size(); s-- > 0;) {
          msg.strides[s] = cells;
          const auto d = static_cast<std::size_t>(model.domain(msg.scope[s]));
          if (cells > SIZE_MAX / d) overflow = true;
          cells = overflow ? SIZE_MAX : cells * d;
        }
        const std::size_t bytes =
            overflow || cells > SIZE_MAX / sizeof(Energy) ? SIZE_MAX : cells * sizeof(Energy);
        h.memory_bytes_ = bytes > SIZE_MAX - h.memory_bytes_ ? SIZE_MAX : h.memory_bytes_ + bytes;
        if (h.memory_bytes_ > memory_cap)
          throw ResourceError("mini-bucket table of bucket " + std::to_string(x) + " over scope " +
                              scope_string(msg.scope) + " exceeds the memory cap of " +
                              std::to_string(memory_cap) + " bytes");

        // Deepest scope variable receives the message.
        for (Residue v : msg.scope)
          if (msg.target < 0 || tree.level(v) > tree.level(msg.target)) msg.target = v;

        if (materialize) {
          msg.values.assign(cells, kInfinity);
          for (std::size_t cell = 0; cell < cells; ++cell) {
            std::size_t rest = cell;
            for (std::size_t s = 0; s < msg.scope.size(); ++s) {
              asg[msg.scope[s]] = static_cast<Rotamer>(rest / msg.strides[s]);
              rest %= msg.strides[s];
            }
            Energy best = kInfinity;
            for (Rotamer r = 0; r < model.domain(x); ++r) {
              asg[x] = r;
              Energy s = 0.0;
              for (const auto& f : mb.functions) s += h.eval_function(model, x, f, asg);
              if (s < best) best = s;
            }
            msg.values[cell] = best;
          }
        }

        const int id = static_cast<int>(h.messages_.size());
        mb.message = id;
        if (msg.target >= 0) incoming[msg.target].push_back(id);
        h.messages_.push_back(std::move(msg));
        h.buckets_[x].push_back(std::move(mb));
      }
    }

    // A message leaves the subtree of every node on the path from its
    // producing bucket up to (excluding) its target.
    for (int m = 0; m < static_cast<int>(h.messages_.size()); ++m) {
      const auto& msg = h.messages_[m];
      for (Residue v = msg.bucket; v != msg.target && v != -1; v = tree.parent(v))
        h.exits_[v].push_back(m);
    }
    return h;
  }

  Energy e0_ = 0.0;
  int i_bound_ = kExactIBound;
  int max_scope_ = 0;
  std::size_t memory_bytes_ = 0;
  std::vector<Message> messages_;
  std::vector<std::vector<MiniBucket>> buckets_;
  std::vector<std::vector<int>> exits_;
  std::vector<std::vector<Residue>> children_;
  std::vector<Residue> roots_;
};

inline MiniBucketHeuristic mini_bucket_elimination(const EnergyModel& model,
                                                   const PseudoTree& tree, int i_bound,
                                                   std::size_t memory_cap = kDefaultMemoryCap) {
  return MiniBucketHeuristic::build(model, tree, i_bound, memory_cap);
}

/// Exact bucket elimination and the minimizer decoded from its tables.
struct BucketTables {
  MiniBucketHeuristic tables;
  Assignment argmin;
  /// Canonical total energy of `argmin`, i.e. the GMEC energy.
  Energy root_value = kInfinity;
};

/// Picks, top-down in preorder, the rotamer minimizing the bucket's
/// functions given the ancestors already fixed (ties to the lowest index).
/// With exact tables this yields a global minimizer.
inline Assignment decode_buckets(const EnergyModel& model, const PseudoTree& tree,
                                 const MiniBucketHeuristic& h) {
  Assignment asg(model.size(), 0);
  for (Residue x : tree.order()) {
    Energy best = kInfinity;
    Rotamer arg = 0;
    for (Rotamer r = 0; r < model.domain(x); ++r) {
      asg[x] = r;
      const Energy s = h.bucket_sum(model, x, asg);
      if (s < best) {
        best = s;
        arg = r;
      }
    }
    asg[x] = arg;
  }
  return asg;
}

inline BucketTables bucket_elimination(const EnergyModel& model, const PseudoTree& tree,
                                       std::size_t memory_cap = kDefaultMemoryCap) {
  BucketTables out;
  out.tables = MiniBucketHeuristic::build(model, tree, kExactIBound, memory_cap);
  out.argmin = decode_buckets(model, tree, out.tables);
  out.root_value = total_energy(model, out.argmin);
  return out;
}

/// Largest useful i-bound whose predicted table memory fits `memory_cap`.
/// When exact elimination fits, returns its largest bucket scope, which
/// partitions every bucket exactly like `kExactIBound`. Throws
/// `ResourceError` if not even i_bound = 2 fits.
inline int choose_ibound(const EnergyModel& model, const PseudoTree& tree,
                         std::size_t memory_cap = kDefaultMemoryCap) {
  const auto exact = MiniBucketHeuristic::plan(model, tree, kExactIBound);
  const int full = std::max(2, exact.max_scope_size());
  if (exact.memory_bytes() <= memory_cap) return full;
  for (int i = full - 1; i >= 2; --i)
    if (MiniBucketHeuristic::plan(model, tree, i).memory_bytes() <= memory_cap) return i;
  throw ResourceError("no i-bound >= 2 fits the memory cap of " + std::to_string(memory_cap) +
                      " bytes");
}

}  // namespace gmec
