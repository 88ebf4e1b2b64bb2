#pragma once

// Shared helpers for the test suite: a truth-table SAT oracle independent of
// the CDCL solver, plus random generators for CNF instances, gate trees, and
// forget/retain circuit pairs. Everything here is test-only and deliberately
// avoids the code paths under test (the oracle enumerates assignments, it
// never propagates or learns).

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "clue/circuit.hpp"
#include "clue/cnf.hpp"

namespace support {

// Truth tables are swept 64 assignments at a time: lane L of a word assigns
// variable v (v <= 6) the bit (L >> (v-1)) & 1, so each low variable's truth
// across the word is a fixed pattern. Higher variables are constant per word.
inline constexpr std::uint64_t lane_pattern[6] = {
    0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
    0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull,
};

namespace detail {

inline std::uint64_t clause_mask(const clue::clause& cl, std::uint64_t block, int lo) {
  std::uint64_t sat = 0;
  for (const auto& l : cl.lits) {
    std::uint64_t truth = l.var <= lo
                              ? lane_pattern[l.var - 1]
                              : ((block >> (l.var - lo - 1)) & 1 ? ~0ull : 0ull);
    sat |= l.negated ? ~truth : truth;
  }
  return sat;
}

}  // namespace detail

// Exhaustive satisfiability decision. Practical up to ~26 variables; tests
// stay at 20 or fewer.
inline bool tt_satisfiable(const clue::cnf_formula& f) {
  const int n = f.var_count;
  if (n > 26) throw std::runtime_error("tt_satisfiable: too many variables");
  const int lo = n < 6 ? n : 6;
  const std::uint64_t lanes = std::uint64_t{1} << lo;
  const std::uint64_t lane_mask = lanes == 64 ? ~0ull : (std::uint64_t{1} << lanes) - 1;
  for (std::uint64_t block = 0; block < (std::uint64_t{1} << (n - lo)); ++block) {
    std::uint64_t ok = lane_mask;
    for (const auto& cl : f.clauses) {
      ok &= detail::clause_mask(cl, block, lo);
      if (!ok) break;
    }
    if (ok) return true;
  }
  return false;
}

// Every satisfying assignment, packed one bit per variable (bit v-1 holds
// variable v), sorted ascending. Caller keeps var_count small enough that
// the model set fits in memory.
inline std::vector<std::uint32_t> tt_models(const clue::cnf_formula& f) {
  const int n = f.var_count;
  if (n > 26) throw std::runtime_error("tt_models: too many variables");
  const int lo = n < 6 ? n : 6;
  const std::uint64_t lanes = std::uint64_t{1} << lo;
  const std::uint64_t lane_mask = lanes == 64 ? ~0ull : (std::uint64_t{1} << lanes) - 1;
  std::vector<std::uint32_t> models;
  for (std::uint64_t block = 0; block < (std::uint64_t{1} << (n - lo)); ++block) {
    std::uint64_t ok = lane_mask;
    for (const auto& cl : f.clauses) {
      ok &= detail::clause_mask(cl, block, lo);
      if (!ok) break;
    }
    while (ok) {
      int lane = std::countr_zero(ok);
      ok &= ok - 1;
      models.push_back(static_cast<std::uint32_t>((block << lo) | static_cast<std::uint64_t>(lane)));
    }
  }
  std::sort(models.begin(), models.end());
  return models;
}

// Random 3-CNF: every clause has three distinct variables, random signs.
inline clue::cnf_formula random_3cnf(int n_vars, int n_clauses, std::mt19937_64& rng) {
  clue::cnf_formula f;
  f.var_count = n_vars;
  for (int i = 0; i < n_clauses; ++i) {
    std::set<int> vars;
    while (static_cast<int>(vars.size()) < 3)
      vars.insert(1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n_vars)));
    std::vector<clue::literal> lits;
    for (int v : vars) lits.push_back(rng() & 1 ? clue::neg(v) : clue::pos(v));
    f.add_clause(std::move(lits));
  }
  return f;
}

// Random gate tree: sources s1..sk are collapsed pairwise or in threes until
// one root remains, so every non-root node feeds exactly one receiver.
// Interior gate kinds come from `interior`, the root's kind from `top`.
inline clue::logical_circuit random_tree(int n_sources, std::mt19937_64& rng,
                                         const std::vector<clue::gate_kind>& interior,
                                         const std::vector<clue::gate_kind>& top,
                                         clue::circuit_role role = clue::circuit_role::untagged) {
  std::vector<clue::neuron_id> nodes, pool;
  for (int i = 1; i <= n_sources; ++i) {
    clue::neuron_id n{"s" + std::to_string(i)};
    nodes.push_back(n);
    pool.push_back(n);
  }
  std::vector<clue::circuit_edge> edges;
  std::map<clue::neuron_id, clue::gate_kind> gates;
  int next_gate = 0;
  while (pool.size() > 1) {
    size_t fan = 2 + (pool.size() > 2 ? rng() % 2 : 0);
    clue::neuron_id g{"g" + std::to_string(++next_gate)};
    for (size_t i = 0; i < fan; ++i) {
      size_t j = rng() % pool.size();
      edges.push_back({pool[j], g});
      pool.erase(pool.begin() + static_cast<long>(j));
    }
    bool is_root = pool.empty();
    const auto& kinds = is_root ? top : interior;
    gates[g] = kinds[rng() % kinds.size()];
    nodes.push_back(g);
    pool.push_back(g);
  }
  return clue::build_circuit(nodes, edges, gates, pool.front(), role);
}

// A forget/retain pair over a shared name pool. Sources come from a1..a6,
// interior gates reuse the names h1..h3 on both sides (possibly with
// different definitions, which makes them genuinely shared neurons), and a
// side may carry one private source. Some fraction of pairs exercise the
// output-name corner cases: both outputs sharing one name, or one side's
// output reappearing as an ordinary node of the other side.
struct circuit_pair {
  clue::logical_circuit forget;
  clue::logical_circuit retain;
};

namespace detail {

inline clue::logical_circuit random_pair_side(std::mt19937_64& rng, clue::circuit_role role,
                                              const std::string& out_name,
                                              const std::string& extra_source) {
  std::vector<std::string> source_pool = {"a1", "a2", "a3", "a4", "a5", "a6"};
  if (!extra_source.empty()) source_pool.push_back(extra_source);

  std::vector<clue::neuron_id> nodes, ready;
  size_t n_src = 2 + rng() % 3;
  if (!extra_source.empty()) n_src = std::max<size_t>(n_src, 3);
  for (size_t i = 0; i < n_src; ++i) {
    size_t j = rng() % source_pool.size();
    // keep the collision source when one was requested
    if (!extra_source.empty() && i == 0)
      j = source_pool.size() - 1;
    clue::neuron_id n{source_pool[j]};
    source_pool.erase(source_pool.begin() + static_cast<long>(j));
    nodes.push_back(n);
    ready.push_back(n);
  }

  std::vector<clue::circuit_edge> edges;
  std::map<clue::neuron_id, clue::gate_kind> gates;
  auto pick_senders = [&](size_t fan, const clue::neuron_id& receiver) {
    std::vector<clue::neuron_id> from = ready;
    for (size_t i = 0; i < fan; ++i) {
      size_t j = rng() % from.size();
      edges.push_back({from[j], receiver});
      from.erase(from.begin() + static_cast<long>(j));
    }
  };

  size_t n_interior = rng() % 3;
  for (size_t i = 0; i < n_interior; ++i) {
    clue::neuron_id g{"h" + std::to_string(i + 1)};
    size_t fan = std::min<size_t>(2 + rng() % 2, ready.size());
    pick_senders(fan, g);
    gates[g] = static_cast<clue::gate_kind>(rng() % 3);
    nodes.push_back(g);
    ready.push_back(g);
  }

  clue::neuron_id out{out_name};
  pick_senders(std::min<size_t>(2 + rng() % 2, ready.size()), out);
  gates[out] = static_cast<clue::gate_kind>(rng() % 3);
  nodes.push_back(out);
  return clue::build_circuit(nodes, edges, gates, out, role);
}

}  // namespace detail

inline circuit_pair random_pair(std::mt19937_64& rng) {
  int variant = static_cast<int>(rng() % 8);
  std::string f_out = "fo", r_out = "ro", f_extra, r_extra;
  if (variant == 0) {
    f_out = r_out = "oo";  // one name serving as both outputs
  } else if (variant == 1) {
    r_extra = "fo";  // forget output reappears inside the retain circuit
  } else if (variant == 2) {
    f_extra = "ro";  // retain output reappears inside the forget circuit
  }
  circuit_pair p;
  p.forget = detail::random_pair_side(rng, clue::circuit_role::forget, f_out, f_extra);
  p.retain = detail::random_pair_side(rng, clue::circuit_role::retain, r_out, r_extra);
  return p;
}

// The worked six-source example used across the discovery tests: two OR
// gates and an AND gate on the first layer, an AND and an OR above them
// (B2 fans out to both), and an additive output.
//
//   B1 = OR(A1, A2)   B2 = AND(A3, A4)   B3 = OR(A5, A6)
//   C1 = AND(B1, B2)  C2 = OR(B2, B3)    out = ADDER(C1, C2)
inline clue::logical_circuit layered_example(clue::circuit_role role = clue::circuit_role::untagged) {
  std::vector<clue::neuron_id> nodes;
  for (const char* n : {"A1", "A2", "A3", "A4", "A5", "A6", "B1", "B2", "B3", "C1", "C2", "out"})
    nodes.push_back({n});
  std::vector<clue::circuit_edge> edges = {
      {{"A1"}, {"B1"}}, {{"A2"}, {"B1"}}, {{"A3"}, {"B2"}}, {{"A4"}, {"B2"}},
      {{"A5"}, {"B3"}}, {{"A6"}, {"B3"}}, {{"B1"}, {"C1"}}, {{"B2"}, {"C1"}},
      {{"B2"}, {"C2"}}, {{"B3"}, {"C2"}}, {{"C1"}, {"out"}}, {{"C2"}, {"out"}},
  };
  std::map<clue::neuron_id, clue::gate_kind> gates = {
      {{"B1"}, clue::gate_kind::OR},  {{"B2"}, clue::gate_kind::AND},
      {{"B3"}, clue::gate_kind::OR},  {{"C1"}, clue::gate_kind::AND},
      {{"C2"}, clue::gate_kind::OR},  {{"out"}, clue::gate_kind::ADDER},
  };
  return clue::build_circuit(nodes, edges, gates, {"out"}, role);
}

// Two-input pair from the satisfiable worked example: the forget circuit is
// an AND of A and B, the retain circuit an OR of the same two sources.
inline circuit_pair and_or_pair() {
  circuit_pair p;
  p.forget = clue::build_circuit({{"A"}, {"B"}, {"fo"}}, {{{"A"}, {"fo"}}, {{"B"}, {"fo"}}},
                                 {{{"fo"}, clue::gate_kind::AND}}, {"fo"},
                                 clue::circuit_role::forget);
  p.retain = clue::build_circuit({{"A"}, {"B"}, {"ro"}}, {{{"A"}, {"ro"}}, {{"B"}, {"ro"}}},
                                 {{{"ro"}, clue::gate_kind::OR}}, {"ro"},
                                 clue::circuit_role::retain);
  return p;
}

// Two-gate pair from the unsatisfiable worked example: forget wants
// OR(A, B) dead, retain wants AND(B, C) alive, so B is torn both ways.
inline circuit_pair or_and_conflict_pair() {
  circuit_pair p;
  p.forget = clue::build_circuit({{"A"}, {"B"}, {"fo"}}, {{{"A"}, {"fo"}}, {{"B"}, {"fo"}}},
                                 {{{"fo"}, clue::gate_kind::OR}}, {"fo"},
                                 clue::circuit_role::forget);
  p.retain = clue::build_circuit({{"B"}, {"C"}, {"ro"}}, {{{"B"}, {"ro"}}, {{"C"}, {"ro"}}},
                                 {{{"ro"}, clue::gate_kind::AND}}, {"ro"},
                                 clue::circuit_role::retain);
  return p;
}

// Exhaustive forward-evaluation image of a role-tagged circuit: for every
// source assignment, the full node-state vector packed into the same
// bit-per-variable key layout as tt_models, using the variable numbering of
// the given formula. ADDERs are simplified by role first, so every state is
// 0/1 and the image is directly comparable with the formula's model set.
inline std::vector<std::uint32_t> eval_image(const clue::logical_circuit& circuit,
                                             const clue::cnf_formula& f) {
  auto c = clue::simplify_adders(circuit);
  auto sources = c.sources();
  if (f.var_count > 26) throw std::runtime_error("eval_image: too many variables");
  std::vector<std::uint32_t> keys;
  keys.reserve(std::size_t{1} << sources.size());
  const std::string out_name = clue::reserved_output_name(c.role);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << sources.size()); ++mask) {
    std::map<clue::neuron_id, clue::activation_state> in;
    for (size_t j = 0; j < sources.size(); ++j)
      in[sources[j]] = static_cast<int>((mask >> j) & 1);
    auto st = clue::evaluate(c, in);
    std::uint32_t key = 0;
    for (const auto& [n, v] : st) {
      int var = f.var_of.at(n == c.output ? out_name : n.name);
      if (v >= 1) key |= std::uint32_t{1} << (var - 1);
    }
    keys.push_back(key);
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

}  // namespace support
