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

// Command-line front end. `run` is the whole program; the executable in
// tools/ only forwards argv to it, which keeps it testable in-process.

#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gmec/oracle.hpp"
#include "gmec/pipeline.hpp"

namespace gmec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitResource = 3;
inline constexpr int kFormatVersion = 1;

/// Flags shared by every subcommand; unused ones are ignored.
struct Flags {
  std::string input;
  bool dee = true;
  double lambda = 0.0;
  std::string ibound = "auto";
  std::size_t mem_cap = kDefaultMemoryCap;
  bool no_prune = false;
  bool stats_only = false;
  std::size_t k = 1;
  std::string delta = "inf";
  std::optional<std::uint64_t> seed;
  std::string method = "brute";
  // gen
  int n = 0;
  int max_domain = 0;
  double density = 0.0;
  double scale = 1.0;
  std::string output = "-";
};

namespace detail {

using nlohmann::ordered_json;

/// Usage problem detected after flag parsing.
struct UsageError : Error {
  using Error::Error;
};

inline double parse_delta(const std::string& s) {
  if (s == "inf" || s == "+inf" || s == "infinity") return kInfinity;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !(v >= 0.0) || !std::isfinite(v))
    throw UsageError("--delta expects a nonnegative number or 'inf', got '" + s + "'");
  return v;
}

inline std::optional<int> parse_ibound(const std::string& s) {
  if (s == "auto") return std::nullopt;
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 2)
    throw UsageError("--ibound expects an integer >= 2 or 'auto', got '" + s + "'");
  return v;
}

inline EnergyModel load(const std::string& path) {
  if (path == "-") return parse_instance(std::cin);
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  return parse_instance(in);
}

inline ordered_json conformation_json(const Conformation& c) {
  return ordered_json{{"energy", c.energy}, {"assignment", c.assignment}};
}

inline ordered_json flags_json(const std::string& command, const Flags& f) {
  ordered_json flags;
  flags["input"] = f.input;
  if (command != "oracle") {
    flags["dee"] = f.dee;
    flags["lambda"] = f.lambda;
    flags["ibound"] = f.ibound;
    flags["mbe_mem_cap"] = f.mem_cap;
    flags["no_prune"] = f.no_prune;
    flags["stats_only"] = f.stats_only;
  } else {
    flags["method"] = f.method;
  }
  if (command != "solve") {
    flags["k"] = f.k;
    flags["delta"] = f.delta;
  }
  return flags;
}

inline ordered_json graph_json(const Pipeline& p) {
  return ordered_json{{"n", p.searched().size()},
                      {"edges", p.sparse.graph.edges().size()},
                      {"induced_width", p.ordering.induced_width},
                      {"tree_depth", p.tree.depth()},
                      {"dropped_error_bound", p.sparse.graph.dropped_error_bound()}};
}

inline ordered_json record(const std::string& command, const Flags& flags,
                           const std::vector<Conformation>& list, const SearchStats& stats,
                           double init_ms, const ordered_json& graph) {
  ordered_json r;
  if (list.empty()) {
    r["energy"] = nullptr;
    r["assignment"] = nullptr;
  } else {
    r["energy"] = list.front().energy;
    r["assignment"] = list.front().assignment;
  }
  r["k_best"] = ordered_json::array();
  for (const auto& c : list) r["k_best"].push_back(conformation_json(c));
  r["stats"] = ordered_json{{"expanded_or", stats.expanded_or},
                            {"expanded_and", stats.expanded_and},
                            {"pruned", stats.pruned},
                            {"heuristic_evals", stats.heuristic_evals},
                            {"init_ms", init_ms},
                            {"search_ms", stats.elapsed_ms}};
  r["graph"] = graph;
  r["provenance"] = ordered_json{{"command", command},
                                 {"flags", flags_json(command, flags)},
                                 {"seed", flags.seed ? ordered_json(*flags.seed) : ordered_json()},
                                 {"format_version", kFormatVersion}};
  return r;
}

inline PipelineConfig config_of(const Flags& f) {
  PipelineConfig c;
  c.dee = f.dee;
  c.lambda = f.lambda;
  c.ibound = parse_ibound(f.ibound);
  c.memory_cap = f.mem_cap;
  c.prune = !f.no_prune;
  return c;
}

inline ordered_json heuristic_json(const Pipeline& p) {
  std::size_t removed = 0;
  if (p.dee)
    for (int i = 0; i < p.original.size(); ++i)
      removed += p.original.domain(i) - p.dee->kept[i].size();
  return ordered_json{{"i_bound", p.heuristic.i_bound()},
                      {"memory_bytes", p.heuristic.memory_bytes()},
                      {"root_bound", p.heuristic.root_bound()},
                      {"dee_pruned_rotamers", removed},
                      {"dee_rounds", p.dee ? p.dee->rounds : 0}};
}

inline int cmd_search(const std::string& command, const Flags& f, std::ostream& out) {
  if (f.k == 0) throw UsageError("--k must be at least 1");
  const double delta = parse_delta(f.delta);
  Pipeline p = prepare(load(f.input), config_of(f));
  std::vector<Conformation> list;
  SearchStats stats;
  if (!f.stats_only) {
    SearchOptions opts;
    opts.prune = !f.no_prune;
    if (command == "solve") {
      Solution s = solve(p.searched(), p.tree, p.heuristic, opts);
      list.push_back(p.to_original(s.conformation));
      stats = std::move(s.stats);
    } else {
      KBestList kb = kbest_solve(p.searched(), p.tree, p.heuristic, f.k, delta, opts);
      for (const auto& c : kb.conformations) list.push_back(p.to_original(c));
      stats = std::move(kb.stats);
    }
  }
  auto r = record(command, f, list, stats, p.init_ms, graph_json(p));
  r["heuristic"] = heuristic_json(p);
  out << r.dump(2) << '\n';
  return kExitOk;
}

inline int cmd_oracle(const Flags& f, std::ostream& out) {
  if (f.k == 0) throw UsageError("--k must be at least 1");
  const double delta = parse_delta(f.delta);
  const EnergyModel model = load(f.input);
  std::vector<Conformation> list;
  SearchStats stats;
  if (f.method == "brute") {
    const auto t0 = std::chrono::steady_clock::now();
    list = brute_force_topk(model, f.k, delta).conformations;
    stats.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  } else if (f.method == "bnb") {
    if (f.k != 1) throw UsageError("--method bnb only supports --k 1");
    PlainBnbResult res = plain_bnb(model, PlainBnbOptions{true, std::nullopt});
    list.push_back(res.conformation);
    stats = std::move(res.stats);
  } else {
    throw UsageError("--method must be 'brute' or 'bnb'");
  }
  const auto graph = InteractionGraph::of(model);
  const auto ordering = min_fill_ordering(graph);
  const auto tree = build_pseudo_tree(graph, ordering);
  const ordered_json g{{"n", model.size()},
                       {"edges", graph.edges().size()},
                       {"induced_width", ordering.induced_width},
                       {"tree_depth", tree.depth()},
                       {"dropped_error_bound", 0.0}};
  out << record("oracle", f, list, stats, 0.0, g).dump(2) << '\n';
  return kExitOk;
}

inline int cmd_stats(const Flags& f, std::ostream& out) {
  PipelineConfig c = config_of(f);
  Pipeline p = prepare(load(f.input), c);
  const auto [ors, ands] = count_full_tree(p.tree, p.searched().domains());
  out << "residues:            " << p.searched().size() << '\n'
      << "edges:               " << p.sparse.graph.edges().size() << '\n'
      << "induced width:       " << p.ordering.induced_width << '\n'
      << "tree depth:          " << p.tree.depth() << '\n'
      << "dropped error bound: " << gmec::detail::format_energy(p.sparse.graph.dropped_error_bound())
      << '\n'
      << "space size:          " << p.original.space_size() << '\n'
      << "space after dee:     " << p.searched().space_size() << '\n'
      << "and/or tree nodes:   " << ors << " or, " << ands << " and\n"
      << "i-bound:             " << p.heuristic.i_bound() << '\n'
      << "heuristic bytes:     " << p.heuristic.memory_bytes() << '\n'
      << "root bound:          " << gmec::detail::format_energy(p.heuristic.root_bound()) << '\n';
  return kExitOk;
}

inline int cmd_gen(const Flags& f, std::ostream& out) {
  if (!f.seed) throw UsageError("gen needs --seed");
  const EnergyModel m = random_instance(*f.seed, f.n, f.max_domain, f.density, f.scale);
  if (f.output == "-") {
    serialize_instance(m, out);
  } else {
    std::ofstream file(f.output);
    if (!file) throw std::ios_base::failure("cannot write '" + f.output + "'");
    serialize_instance(m, file);
  }
  return kExitOk;
}

}  // namespace detail

/// Runs one CLI invocation. `args` excludes the program name.
/// Exit codes: 0 success, 1 unreadable or malformed input, 2 usage error,
/// 3 resource limit exceeded.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Flags f;
  CLI::App app{"Exact GMEC solver: AND/OR branch-and-bound with mini-bucket heuristics", "gmec"};
  app.require_subcommand(1);

  auto add_input = [&](CLI::App* sub) {
    sub->add_option("--input", f.input, "Instance file in GMEC 1 format ('-' for stdin)")
        ->required();
  };
  std::vector<CLI::Option*> dee_flags;
  auto add_pipeline = [&](CLI::App* sub) {
    dee_flags.push_back(sub->add_flag("--dee,!--no-dee", f.dee,
                                      "Goldstein DEE preprocessing (default on; off for kbest)"));
    sub->add_option("--lambda", f.lambda, "Drop pair tables whose range is <= lambda")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--ibound", f.ibound, "Mini-bucket i-bound, or 'auto'");
    sub->add_option("--mbe-mem-cap", f.mem_cap, "Heuristic table memory cap in bytes");
    sub->add_flag("--no-prune", f.no_prune, "Disable bounding (debug)");
    sub->add_flag("--stats-only", f.stats_only, "Build the pipeline but skip search");
    sub->add_option("--seed", f.seed, "Recorded in the provenance block");
  };
  auto add_k = [&](CLI::App* sub) {
    sub->add_option("--k", f.k, "Number of conformations");
    sub->add_option("--delta", f.delta, "Energy window above the GMEC, or 'inf'");
  };

  auto* solve_cmd = app.add_subcommand("solve", "Find the GMEC");
  add_input(solve_cmd);
  add_pipeline(solve_cmd);
  auto* kbest_cmd = app.add_subcommand("kbest", "Enumerate the k best conformations");
  add_input(kbest_cmd);
  add_pipeline(kbest_cmd);
  add_k(kbest_cmd);
  auto* stats_cmd = app.add_subcommand("stats", "Print problem and pseudo-tree statistics");
  add_input(stats_cmd);
  add_pipeline(stats_cmd);
  auto* oracle_cmd = app.add_subcommand("oracle", "Exhaustive or plain branch-and-bound reference");
  add_input(oracle_cmd);
  add_k(oracle_cmd);
  oracle_cmd->add_option("--method", f.method, "'brute' (enumeration) or 'bnb'");
  auto* gen_cmd = app.add_subcommand("gen", "Write a random instance");
  gen_cmd->add_option("--seed", f.seed, "Generator seed")->required();
  gen_cmd->add_option("--n", f.n, "Residue count")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--max-domain", f.max_domain, "Largest rotamer count")
      ->required()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--density", f.density, "Pair presence probability")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--scale", f.scale, "Energies are drawn from [0, scale)")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--output", f.output, "Output path ('-' for stdout)");

  std::vector<const char*> argv{"gmec"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  // DEE keeps the optimum but may remove near-optimal rotamers, so k-best
  // enumeration only uses it on request.
  if (kbest_cmd->parsed() && dee_flags[1]->count() == 0) f.dee = false;

  try {
    if (solve_cmd->parsed()) return detail::cmd_search("solve", f, out);
    if (kbest_cmd->parsed()) return detail::cmd_search("kbest", f, out);
    if (stats_cmd->parsed()) return detail::cmd_stats(f, out);
    if (oracle_cmd->parsed()) return detail::cmd_oracle(f, out);
    if (gen_cmd->parsed()) return detail::cmd_gen(f, out);
  } catch (const detail::UsageError& e) {
    err << "gmec: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "gmec: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ResourceError& e) {
    err << "gmec: " << e.what() << '\n';
    return kExitResource;
  } catch (const ParseError& e) {
    err << "gmec: " << f.input << ": " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "gmec: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitUsage;
}

}  // namespace gmec::cli
