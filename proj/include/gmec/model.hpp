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
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gmec/error.hpp"
#include "gmec/rng.hpp"

namespace gmec {

using Energy = double;
using Residue = int;
using Rotamer = int;
using Assignment = std::vector<Rotamer>;

inline constexpr Energy kInfinity = std::numeric_limits<Energy>::infinity();

/// Pairwise energy table between residues `i < j`, stored row-major over
/// (r_i, r_j).
struct PairTable {
  Residue i = 0;
  Residue j = 0;
  std::vector<Energy> values;
};

/// Pairwise decomposable energy function
///
///   E(r) = e0 + sum_i self_i(r_i) + sum_{i<j} pair_ij(r_i, r_j).
///
/// Immutable after construction. An absent pair table is identically zero.
class EnergyModel {
 public:
  EnergyModel() = default;

  /// Validates every invariant and throws `InvalidArgument` (or
  /// `InvalidPair` for bad keys) on violation. Pair tables may be given in
  /// any order; they are stored sorted by (i, j).
  EnergyModel(std::vector<int> domains, Energy e0,
              std::vector<std::vector<Energy>> self_energy,
              std::vector<PairTable> pairs)
      : domains_(std::move(domains)),
        e0_(e0),
        self_(std::move(self_energy)),
        pairs_(std::move(pairs)) {
    const auto n = domains_.size();
    if (n == 0) throw InvalidArgument("model needs at least one residue");
    if (self_.size() != n)
      throw InvalidArgument("self energy count does not match residue count");
    if (!std::isfinite(e0_)) throw InvalidArgument("e0 is not finite");
    for (std::size_t i = 0; i < n; ++i) {
      if (domains_[i] < 1)
        throw InvalidArgument("residue " + std::to_string(i) +
                              " has an empty domain");
      if (self_[i].size() != static_cast<std::size_t>(domains_[i]))
        throw InvalidArgument("self energy of residue " + std::to_string(i) +
                              " has wrong length");
      for (Energy v : self_[i])
        if (!std::isfinite(v))
          throw InvalidArgument("non-finite self energy at residue " +
                                std::to_string(i));
    }
    std::sort(pairs_.begin(), pairs_.end(), [](const PairTable& a, const PairTable& b) {
      return std::pair(a.i, a.j) < std::pair(b.i, b.j);
    });
    neighbors_.assign(n, {});
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
      const auto& t = pairs_[p];
      if (t.i < 0 || t.j <= t.i || static_cast<std::size_t>(t.j) >= n)
        throw InvalidPair("pair key (" + std::to_string(t.i) + ", " +
                          std::to_string(t.j) + ") violates i < j < n");
      if (p > 0 && pairs_[p - 1].i == t.i && pairs_[p - 1].j == t.j)
        throw InvalidPair("duplicate pair (" + std::to_string(t.i) + ", " +
                          std::to_string(t.j) + ")");
      neighbors_[t.i].emplace_back(t.j, static_cast<int>(p));
      neighbors_[t.j].emplace_back(t.i, static_cast<int>(p));
      if (t.values.size() != static_cast<std::size_t>(domains_[t.i]) * domains_[t.j])
        throw InvalidArgument("pair (" + std::to_string(t.i) + ", " +
                              std::to_string(t.j) + ") has wrong table size");
      for (Energy v : t.values)
        if (!std::isfinite(v))
          throw InvalidArgument("non-finite pair energy in (" +
                                std::to_string(t.i) + ", " +
                                std::to_string(t.j) + ")");
    }
    for (auto& adj : neighbors_) std::sort(adj.begin(), adj.end());
  }

  int size() const noexcept { return static_cast<int>(domains_.size()); }
  int domain(Residue i) const { return domains_.at(i); }
  const std::vector<int>& domains() const noexcept { return domains_; }
  Energy e0() const noexcept { return e0_; }

  std::span<const Energy> self(Residue i) const { return self_.at(i); }
  Energy self(Residue i, Rotamer r) const { return self_[i][r]; }

  /// All present pair tables, sorted by (i, j).
  const std::vector<PairTable>& pairs() const noexcept { return pairs_; }

  /// Table for the unordered pair {a, b}, or nullptr when absent.
  const PairTable* pair(Residue a, Residue b) const {
    const auto& adj = neighbors_.at(a);
    auto it = std::lower_bound(adj.begin(), adj.end(), std::pair(b, -1));
    if (it == adj.end() || it->first != b) return nullptr;
    return &pairs_[it->second];
  }

  /// Residues sharing a pair table with `a`, ascending, with table indices.
  const std::vector<std::pair<Residue, int>>& neighbors(Residue a) const {
    return neighbors_.at(a);
  }

  /// E_2 between residue a at rotamer ra and residue b at rotamer rb, in
  /// either argument order. Zero when the pair is absent.
  Energy pair_energy(Residue a, Rotamer ra, Residue b, Rotamer rb) const {
    const PairTable* t = pair(a, b);
    if (t == nullptr) return 0.0;
    if (a < b) return t->values[static_cast<std::size_t>(ra) * domains_[b] + rb];
    return t->values[static_cast<std::size_t>(rb) * domains_[a] + ra];
  }

  /// Product of the domain sizes as a double (saturates instead of wrapping).
  double space_size() const noexcept {
    double s = 1.0;
    for (int d : domains_) s *= d;
    return s;
  }

  friend bool operator==(const EnergyModel& a, const EnergyModel& b) {
    if (a.domains_ != b.domains_ || a.self_ != b.self_ ||
        a.pairs_.size() != b.pairs_.size())
      return false;
    if (std::bit_cast<std::uint64_t>(a.e0_) != std::bit_cast<std::uint64_t>(b.e0_))
      return false;
    for (std::size_t p = 0; p < a.pairs_.size(); ++p) {
      const auto& x = a.pairs_[p];
      const auto& y = b.pairs_[p];
      if (x.i != y.i || x.j != y.j || x.values != y.values) return false;
    }
    return true;
  }

 private:
  std::vector<int> domains_;
  Energy e0_ = 0.0;
  std::vector<std::vector<Energy>> self_;
  std::vector<PairTable> pairs_;
  std::vector<std::vector<std::pair<Residue, int>>> neighbors_;
};

/// One rotamer per residue plus its total energy.
struct Conformation {
  Assignment assignment;
  Energy energy = kInfinity;

  friend bool operator==(const Conformation&, const Conformation&) = default;
};

inline void check_assignment(const EnergyModel& model, std::span<const Rotamer> assignment) {
  if (assignment.size() != static_cast<std::size_t>(model.size()))
    throw InvalidAssignment("assignment has length " +
                            std::to_string(assignment.size()) + ", expected " +
                            std::to_string(model.size()));
  for (int i = 0; i < model.size(); ++i)
    if (assignment[i] < 0 || assignment[i] >= model.domain(i))
      throw InvalidAssignment("rotamer " + std::to_string(assignment[i]) +
                              " out of domain at residue " + std::to_string(i));
}

/// Total energy in canonical order: e0, then self terms by ascending
/// residue, then pair terms by ascending (i, j), accumulated left to right.
/// Every module that reports an energy goes through this function so that
/// energies compare exactly.
inline Energy total_energy(const EnergyModel& model, std::span<const Rotamer> assignment) {
  check_assignment(model, assignment);
  Energy e = model.e0();
  for (int i = 0; i < model.size(); ++i) e += model.self(i, assignment[i]);
  for (const auto& t : model.pairs())
    e += t.values[static_cast<std::size_t>(assignment[t.i]) * model.domain(t.j) +
                  assignment[t.j]];
  return e;
}

inline Conformation make_conformation(const EnergyModel& model, Assignment assignment) {
  Conformation c;
  c.energy = total_energy(model, assignment);
  c.assignment = std::move(assignment);
  return c;
}

/// (min, max) entry of the pair table {i, j}; (0, 0) when absent.
inline std::pair<Energy, Energy> pair_range(const EnergyModel& model, Residue i, Residue j) {
  if (i < 0 || j <= i || j >= model.size())
    throw InvalidPair("pair_range needs 0 <= i < j < n, got (" +
                      std::to_string(i) + ", " + std::to_string(j) + ")");
  const PairTable* t = model.pair(i, j);
  if (t == nullptr) return {0.0, 0.0};
  const auto [lo, hi] = std::minmax_element(t->values.begin(), t->values.end());
  return {*lo, *hi};
}

// ---------------------------------------------------------------------------
// Instance text format
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_energy(Energy v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
    out.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

inline long long parse_int(std::string_view tok, std::size_t line) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(line, "expected integer, got '" + std::string(tok) + "'");
  return v;
}

inline Energy parse_energy(std::string_view tok, std::size_t line) {
  Energy v = 0.0;
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(line, "expected number, got '" + std::string(tok) + "'");
  if (!std::isfinite(v))
    throw ParseError(line, "non-finite number '" + std::string(tok) + "'");
  return v;
}

}  // namespace detail

/// Parses the line-oriented `GMEC 1` instance format:
///
///   GMEC 1
///   n <N>
///   d <d_0> ... <d_{N-1}>
///   e0 <float>
///   self <i> <v_0> ... <v_{d_i-1}>          (exactly once per residue)
///   pair <i> <j> <t_00> ... (row-major)     (i < j, at most once per pair)
///
/// Lines whose first non-blank character is '#' and blank lines are ignored.
/// The header lines must appear in the order shown; self and pair lines may
/// follow in any order.
inline EnergyModel parse_instance(std::istream& in) {
  std::string raw;
  std::size_t lineno = 0;
  enum class Stage { kMagic, kN, kD, kE0, kBody } stage = Stage::kMagic;
  long long n = 0;
  std::vector<int> domains;
  Energy e0 = 0.0;
  std::vector<std::vector<Energy>> self;
  std::vector<bool> have_self;
  std::vector<PairTable> pairs;
  std::vector<std::size_t> pair_lines;

  while (std::getline(in, raw)) {
    ++lineno;
    const auto toks = detail::split_tokens(raw);
    if (toks.empty() || toks.front().front() == '#') continue;
    const auto key = toks.front();
    switch (stage) {
      case Stage::kMagic:
        if (key != "GMEC" || toks.size() != 2)
          throw ParseError(lineno, "expected header 'GMEC 1'");
        if (toks[1] != "1")
          throw ParseError(lineno, "unsupported format version '" + std::string(toks[1]) + "'");
        stage = Stage::kN;
        break;
      case Stage::kN:
        if (key != "n" || toks.size() != 2) throw ParseError(lineno, "expected 'n <N>'");
        n = detail::parse_int(toks[1], lineno);
        if (n < 1 || n > 1'000'000) throw ParseError(lineno, "residue count out of range");
        stage = Stage::kD;
        break;
      case Stage::kD:
        if (key != "d") throw ParseError(lineno, "expected 'd <d_0> ... <d_{n-1}>'");
        if (static_cast<long long>(toks.size()) != n + 1)
          throw ParseError(lineno, "domain line has " + std::to_string(toks.size() - 1) +
                                       " entries, expected " + std::to_string(n));
        for (std::size_t t = 1; t < toks.size(); ++t) {
          const auto d = detail::parse_int(toks[t], lineno);
          if (d < 1 || d > 1'000'000) throw ParseError(lineno, "domain size out of range");
          domains.push_back(static_cast<int>(d));
        }
        self.resize(n);
        have_self.assign(n, false);
        stage = Stage::kE0;
        break;
      case Stage::kE0:
        if (key != "e0" || toks.size() != 2) throw ParseError(lineno, "expected 'e0 <float>'");
        e0 = detail::parse_energy(toks[1], lineno);
        stage = Stage::kBody;
        break;
      case Stage::kBody:
        if (key == "self") {
          if (toks.size() < 2) throw ParseError(lineno, "self line without residue");
          const auto i = detail::parse_int(toks[1], lineno);
          if (i < 0 || i >= n) throw ParseError(lineno, "self residue out of range");
          if (have_self[i]) throw ParseError(lineno, "duplicate self line for residue " + std::to_string(i));
          if (toks.size() - 2 != static_cast<std::size_t>(domains[i]))
            throw ParseError(lineno, "self line for residue " + std::to_string(i) + " has " +
                                         std::to_string(toks.size() - 2) + " values, expected " +
                                         std::to_string(domains[i]));
          for (std::size_t t = 2; t < toks.size(); ++t)
            self[i].push_back(detail::parse_energy(toks[t], lineno));
          have_self[i] = true;
        } else if (key == "pair") {
          if (toks.size() < 3) throw ParseError(lineno, "pair line without residues");
          const auto i = detail::parse_int(toks[1], lineno);
          const auto j = detail::parse_int(toks[2], lineno);
          if (i < 0 || j >= n || i >= j)
            throw ParseError(lineno, "pair key must satisfy 0 <= i < j < n");
          for (std::size_t p = 0; p < pairs.size(); ++p)
            if (pairs[p].i == i && pairs[p].j == j)
              throw ParseError(lineno, "duplicate pair line (first at line " +
                                           std::to_string(pair_lines[p]) + ")");
          const auto expected = static_cast<std::size_t>(domains[i]) * domains[j];
          if (toks.size() - 3 != expected)
            throw ParseError(lineno, "pair line has " + std::to_string(toks.size() - 3) +
                                         " values, expected " + std::to_string(expected));
          PairTable t{static_cast<Residue>(i), static_cast<Residue>(j), {}};
          t.values.reserve(expected);
          for (std::size_t k = 3; k < toks.size(); ++k)
            t.values.push_back(detail::parse_energy(toks[k], lineno));
          pairs.push_back(std::move(t));
          pair_lines.push_back(lineno);
        } else {
          throw ParseError(lineno, "unknown record '" + std::string(key) + "'");
        }
        break;
    }
  }
  if (stage != Stage::kBody) throw ParseError(0, "unexpected end of input in header");
  for (long long i = 0; i < n; ++i)
    if (!have_self[i]) throw ParseError(0, "missing self line for residue " + std::to_string(i));
  return EnergyModel(std::move(domains), e0, std::move(self), std::move(pairs));
}

inline EnergyModel parse_instance(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_instance(in);
}

/// Canonical text form: header, self lines by residue, pair lines by (i, j),
/// every number in shortest round-trip form.
inline void serialize_instance(const EnergyModel& model, std::ostream& out) {
  out << "GMEC 1\n";
  out << "n " << model.size() << '\n';
  out << 'd';
  for (int d : model.domains()) out << ' ' << d;
  out << '\n';
  out << "e0 " << detail::format_energy(model.e0()) << '\n';
  for (int i = 0; i < model.size(); ++i) {
    out << "self " << i;
    for (Energy v : model.self(i)) out << ' ' << detail::format_energy(v);
    out << '\n';
  }
  for (const auto& t : model.pairs()) {
    out << "pair " << t.i << ' ' << t.j;
    for (Energy v : t.values) out << ' ' << detail::format_energy(v);
    out << '\n';
  }
}

inline std::string serialize_instance(const EnergyModel& model) {
  std::ostringstream out;
  serialize_instance(model, out);
  return out.str();
}

/// Deterministic random instance. Draws from one SplitMix64 stream seeded
/// with `seed`, in this order:
///
///   1. d_i = 1 + below(max_domain) for i = 0..n-1
///   2. e0 = energy_scale * uniform()
///   3. self_i(r) = energy_scale * uniform() for i ascending, r ascending
///   4. for each pair (i, j), i < j, lexicographically: the pair is present
///      iff uniform() < edge_density; a present pair then draws its
///      d_i * d_j entries row-major as energy_scale * uniform()
inline EnergyModel random_instance(std::uint64_t seed, int n, int max_domain,
                                   double edge_density, double energy_scale) {
  if (n < 1) throw InvalidArgument("random_instance needs n >= 1");
  if (max_domain < 1) throw InvalidArgument("random_instance needs max_domain >= 1");
  if (!(edge_density >= 0.0 && edge_density <= 1.0))
    throw InvalidArgument("edge_density must lie in [0, 1]");
  if (!(energy_scale > 0.0) || !std::isfinite(energy_scale))
    throw InvalidArgument("energy_scale must be positive and finite");

  SplitMix64 rng(seed);
  std::vector<int> domains(n);
  for (auto& d : domains) d = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_domain)));
  const Energy e0 = energy_scale * rng.uniform();
  std::vector<std::vector<Energy>> self(n);
  for (int i = 0; i < n; ++i) {
    self[i].resize(domains[i]);
    for (auto& v : self[i]) v = energy_scale * rng.uniform();
  }
  std::vector<PairTable> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (!(rng.uniform() < edge_density)) continue;
      PairTable t{i, j, std::vector<Energy>(static_cast<std::size_t>(domains[i]) * domains[j])};
      for (auto& v : t.values) v = energy_scale * rng.uniform();
      pairs.push_back(std::move(t));
    }
  return EnergyModel(std::move(domains), e0, std::move(self), std::move(pairs));
}

}  // namespace gmec
