#pragma once

// Classifies every neuron across a forget/retain circuit pair.
//
// Phase one builds the joint formula (forget CNF, retain CNF, forget output
// off, retain output on) over shared variables and solves it. A model sorts
// neurons into safe-retain (value 1), forget (value 0), and safe-absent
// (allocated but appearing in no clause).
//
// When the joint formula is unsatisfiable, phase two rebuilds it with every
// shared neuron n split into n::f and n::r plus a selector sel::n whose truth
// forces the two sides equal. A sequential-counter ladder over the negated
// selectors bounds how many neurons may stay split, and a linear search
// k = 1, 2, ... on one persistent solver (learned clauses carry over) finds
// the minimum number of splits. At that minimum, candidate conflict sets are
// tried in lexicographic order so ties resolve to the smallest-named set.
// Conflict neurons are reported with per-side values, preferring the
// (forget-side 0, retain-side 1) reading whenever the formula admits it.
//
// brute_force_localize is the independent oracle: it enumerates candidate
// sets the same way but decides each one by direct gate evaluation over all
// source assignments, with no CNF or solver involved.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "clue/circuit.hpp"
#include "clue/cnf.hpp"
#include "clue/error.hpp"
#include "clue/solver.hpp"

namespace clue {

enum class neuron_class { safe_absent, safe_retain, forget, conflict };

inline const char* neuron_class_name(neuron_class c) {
  switch (c) {
    case neuron_class::safe_absent: return "safe_absent";
    case neuron_class::safe_retain: return "safe_retain";
    case neuron_class::forget: return "forget";
    case neuron_class::conflict: return "conflict";
  }
  return "?";
}

// Per-side values reported for a conflict neuron.
struct side_values {
  activation_state forget_side = 0;
  activation_state retain_side = 1;
  auto operator<=>(const side_values&) const = default;
};

struct localization_report {
  std::map<neuron_id, neuron_class> classes;
  int conflict_count = 0;
  std::map<neuron_id, side_values> conflict_values;
  solve_stats stats;  // summed over every solver call made
  std::uint64_t seed = 0;
};

namespace detail {

inline void add_stats(solve_stats& into, const solve_stats& s) {
  into.conflicts += s.conflicts;
  into.decisions += s.decisions;
  into.propagations += s.propagations;
  into.restarts += s.restarts;
  into.learned += s.learned;
}

// Names the splitter synthesizes; real neurons may not use them.
inline bool has_reserved_affix(const std::string& name) {
  return name.ends_with("::f") || name.ends_with("::r") ||
         name.starts_with("sel::") || name.starts_with("card::");
}

inline logical_circuit rename_split(const logical_circuit& c,
                                    const std::set<neuron_id>& split,
                                    const std::string& suffix) {
  auto mapped = [&](const neuron_id& n) -> neuron_id {
    return split.count(n) ? neuron_id{n.name + suffix} : n;
  };
  std::vector<neuron_id> nodes;
  nodes.reserve(c.nodes.size());
  for (const auto& n : c.nodes) nodes.push_back(mapped(n));
  std::vector<circuit_edge> edges;
  edges.reserve(c.edges.size());
  for (const auto& e : c.edges) edges.push_back({mapped(e.first), mapped(e.second)});
  std::map<neuron_id, gate_kind> gates;
  for (const auto& [n, k] : c.gates) gates[mapped(n)] = k;
  return build_circuit(std::move(nodes), std::move(edges), std::move(gates),
                       mapped(c.output), c.role);
}

// Index-compiled evaluator for the oracle's inner loop.
struct compiled_circuit {
  std::vector<int> kind;  // gate kind per node, -1 for sources
  std::vector<std::vector<int>> senders;
  std::map<neuron_id, int> index;
  int out = 0;

  explicit compiled_circuit(const logical_circuit& c) {
    int n = static_cast<int>(c.nodes.size());
    kind.assign(n, -1);
    senders.resize(n);
    for (int i = 0; i < n; ++i) index[c.nodes[i]] = i;
    for (int i = 0; i < n; ++i) {
      auto g = c.gates.find(c.nodes[i]);
      if (g == c.gates.end()) continue;
      kind[i] = static_cast<int>(g->second);
      for (const auto& s : c.senders_of(c.nodes[i])) senders[i].push_back(index.at(s));
    }
    out = index.at(c.output);
  }

  // st arrives with source slots filled; gated slots are recomputed in order
  void forward(std::vector<int>& st) const {
    for (size_t i = 0; i < kind.size(); ++i) {
      if (kind[i] < 0) continue;
      int v = 0;
      switch (static_cast<gate_kind>(kind[i])) {
        case gate_kind::AND:
          v = 1;
          for (int s : senders[i])
            if (st[s] < 1) { v = 0; break; }
          break;
        case gate_kind::OR:
          for (int s : senders[i])
            if (st[s] >= 1) { v = 1; break; }
          break;
        case gate_kind::ADDER:
          for (int s : senders[i]) v += st[s] >= 1 ? 1 : 0;
          break;
      }
      st[i] = v;
    }
  }
};

// Advances a k-subset of {0..m-1} to its lexicographic successor.
inline bool next_combination(std::vector<int>& pick, int m) {
  int k = static_cast<int>(pick.size());
  int t = k - 1;
  while (t >= 0 && pick[t] == m - k + t) --t;
  if (t < 0) return false;
  ++pick[t];
  for (int u = t + 1; u < k; ++u) pick[u] = pick[u - 1] + 1;
  return true;
}

}  // namespace detail

inline localization_report localize(const logical_circuit& circuit_f,
                                    const logical_circuit& circuit_r,
                                    std::uint64_t seed = 0) {
  if (circuit_f.role != circuit_role::forget)
    fail(errc::role_mismatch, "localize expects the forget circuit first");
  if (circuit_r.role != circuit_role::retain)
    fail(errc::role_mismatch, "localize expects the retain circuit second");

  std::set<neuron_id> universe(circuit_f.nodes.begin(), circuit_f.nodes.end());
  universe.insert(circuit_r.nodes.begin(), circuit_r.nodes.end());
  for (const auto& n : universe)
    if (detail::has_reserved_affix(n.name))
      fail(errc::reserved_name,
           "neuron name '" + n.name + "' collides with localization bookkeeping names");

  localization_report rep;
  rep.seed = seed;
  rep.stats.seed = seed;

  // Names are neuron identity across the pair. One name serving as both
  // outputs is therefore a neuron pinned to 0 and 1 at once: a conflict no
  // model can dissolve, handled outside the solver.
  bool same_output = circuit_f.output == circuit_r.output;
  std::set<neuron_id> f_names(circuit_f.nodes.begin(), circuit_f.nodes.end());
  std::set<neuron_id> r_names(circuit_r.nodes.begin(), circuit_r.nodes.end());

  var_allocator alloc;
  auto phi_f = circuit_to_cnf(circuit_f, alloc);
  auto phi_r = circuit_to_cnf(circuit_r, alloc);
  auto phi = compose_phi(phi_f, phi_r);

  // An output name reappearing as an ordinary node of the other circuit is
  // the same neuron, so its pinned output variable and the shared variable
  // must agree.
  if (!same_output && r_names.count(circuit_f.output)) {
    int out_var = phi.var_for_name(output_f_name);
    int node_var = phi.var_for_name(circuit_f.output.name);
    phi.add_clause({neg(out_var), pos(node_var)});
    phi.add_clause({pos(out_var), neg(node_var)});
  }
  if (!same_output && f_names.count(circuit_r.output)) {
    int out_var = phi.var_for_name(output_r_name);
    int node_var = phi.var_for_name(circuit_r.output.name);
    phi.add_clause({neg(out_var), pos(node_var)});
    phi.add_clause({pos(out_var), neg(node_var)});
  }

  std::vector<bool> used(static_cast<size_t>(phi.var_count) + 1, false);
  for (const auto& cl : phi.clauses)
    for (const auto& l : cl.lits) used[static_cast<size_t>(l.var)] = true;

  auto classify = [&](const std::set<neuron_id>& conflicts, auto value_of) {
    for (const auto& n : universe) {
      if (same_output && n == circuit_f.output) {
        rep.classes[n] = neuron_class::conflict;
        rep.conflict_values[n] = {0, 1};
        continue;
      }
      if (conflicts.count(n)) { rep.classes[n] = neuron_class::conflict; continue; }
      if (n == circuit_f.output) { rep.classes[n] = neuron_class::forget; continue; }
      if (n == circuit_r.output) { rep.classes[n] = neuron_class::safe_retain; continue; }
      auto it = phi.var_of.find(n.name);
      if (it == phi.var_of.end())
        fail(errc::internal_error, "neuron '" + n.name + "' missing from the joint formula");
      if (!used[static_cast<size_t>(it->second)]) {
        rep.classes[n] = neuron_class::safe_absent;
        continue;
      }
      rep.classes[n] = value_of(n) ? neuron_class::safe_retain : neuron_class::forget;
    }
  };
  auto tally_conflicts = [&rep] {
    rep.conflict_count = 0;
    for (const auto& [n, cls] : rep.classes)
      if (cls == neuron_class::conflict) ++rep.conflict_count;
  };

  sat_solver solver(phi, seed);
  auto first = solver.solve();
  if (first.satisfiable) {
    classify({}, [&](const neuron_id& n) { return first.model.value(phi.var_of.at(n.name)); });
    tally_conflicts();
    detail::add_stats(rep.stats, solver.cumulative_stats());
    return rep;
  }

  // Phase two: split the shared neurons behind selectors. A name that is an
  // output on one side only still splits like any other shared neuron; its
  // variable on the output side is the pinned reserved one.
  std::set<neuron_id> shared_set;
  for (const auto& n : circuit_r.nodes)
    if (f_names.count(n) && !(same_output && n == circuit_f.output))
      shared_set.insert(n);
  std::vector<neuron_id> shared(shared_set.begin(), shared_set.end());
  int m = static_cast<int>(shared.size());
  if (m == 0)
    fail(errc::internal_error, "joint formula unsatisfiable with no shared neurons");

  var_allocator alloc2;
  auto phi2 = compose_phi(circuit_to_cnf(detail::rename_split(circuit_f, shared_set, "::f"), alloc2),
                          circuit_to_cnf(detail::rename_split(circuit_r, shared_set, "::r"), alloc2));

  std::vector<int> sel(m), vf(m), vr(m);
  for (int i = 0; i < m; ++i) {
    const auto& n = shared[static_cast<size_t>(i)];
    vf[i] = n == circuit_f.output ? alloc2.var_for(output_f_name)
                                  : alloc2.var_for(n.name + "::f");
    vr[i] = n == circuit_r.output ? alloc2.var_for(output_r_name)
                                  : alloc2.var_for(n.name + "::r");
    sel[i] = alloc2.var_for("sel::" + n.name);
    phi2.add_clause({neg(sel[i]), neg(vf[i]), pos(vr[i])});
    phi2.add_clause({neg(sel[i]), pos(vf[i]), neg(vr[i])});
  }

  // Sequential counter over the disabled selectors: card::i::j says at least
  // j of the first i selectors are off. Only the upward direction is forced,
  // which is all an at-most bound needs.
  auto ladder = [&alloc2](int i, int j) {
    return alloc2.var_for("card::" + std::to_string(i) + "::" + std::to_string(j));
  };
  for (int i = 1; i <= m; ++i) phi2.add_clause({pos(sel[i - 1]), pos(ladder(i, 1))});
  for (int i = 2; i <= m; ++i)
    for (int j = 1; j <= m; ++j) {
      phi2.add_clause({neg(ladder(i - 1, j)), pos(ladder(i, j))});
      if (j >= 2)
        phi2.add_clause({pos(sel[i - 1]), neg(ladder(i - 1, j - 1)), pos(ladder(i, j))});
    }
  phi2.adopt_names(alloc2);

  sat_solver solver2(phi2, seed);
  int kstar = -1;
  for (int k = 1; k <= m; ++k) {
    std::vector<literal> assume;
    if (k < m) assume.push_back(neg(ladder(m, k + 1)));  // at most k splits
    if (solver2.solve_under_assumptions(assume).satisfiable) {
      kstar = k;
      break;
    }
  }
  if (kstar < 0)
    fail(errc::internal_error, "relaxed formula unsatisfiable even with every shared neuron split");

  // Smallest-named conflict set of the minimum size: fixing the complement's
  // selectors on leaves at most the candidate set split, and any model would
  // otherwise witness a smaller set than kstar, so the first satisfiable
  // candidate is exactly the set reported.
  std::vector<int> pick(static_cast<size_t>(kstar));
  std::iota(pick.begin(), pick.end(), 0);
  std::set<neuron_id> conflicts;
  solve_result chosen;
  while (true) {
    std::vector<bool> in_pick(static_cast<size_t>(m), false);
    for (int i : pick) in_pick[static_cast<size_t>(i)] = true;
    std::vector<literal> assume;
    for (int i = 0; i < m; ++i)
      if (!in_pick[static_cast<size_t>(i)]) assume.push_back(pos(sel[i]));
    auto r2 = solver2.solve_under_assumptions(assume);
    if (r2.satisfiable) {
      for (int i : pick) conflicts.insert(shared[static_cast<size_t>(i)]);
      chosen = std::move(r2);
      break;
    }
    if (!detail::next_combination(pick, m))
      fail(errc::internal_error, "no conflict set of the established size was found");
  }

  // Prefer the (0, 1) per-side reading; keep the found model if that exact
  // combination is infeasible for this set.
  std::vector<literal> force;
  for (int i = 0; i < m; ++i) {
    if (conflicts.count(shared[static_cast<size_t>(i)])) {
      force.push_back(neg(vf[i]));
      force.push_back(pos(vr[i]));
    } else {
      force.push_back(pos(sel[i]));
    }
  }
  auto forced = solver2.solve_under_assumptions(force);
  const assignment& model = forced.satisfiable ? forced.model : chosen.model;

  classify(conflicts, [&](const neuron_id& n) {
    bool is_shared = shared_set.count(n) > 0;
    return model.value(phi2.var_of.at(is_shared ? n.name + "::f" : n.name));
  });
  for (int i = 0; i < m; ++i) {
    const auto& n = shared[static_cast<size_t>(i)];
    if (conflicts.count(n))
      rep.conflict_values[n] = {model.value(vf[i]) ? 1 : 0, model.value(vr[i]) ? 1 : 0};
  }
  tally_conflicts();
  detail::add_stats(rep.stats, solver.cumulative_stats());
  detail::add_stats(rep.stats, solver2.cumulative_stats());
  return rep;
}

// Ground-truth localization by exhaustive evaluation. Candidate conflict
// sets go by size then lexicographic order; a candidate is admitted when
// some assignment of the free source bits (split neurons get per-side bits)
// makes the forget output 0, the retain output 1, and every unsplit shared
// neuron agree across the two circuits.
inline localization_report brute_force_localize(const logical_circuit& circuit_f,
                                                const logical_circuit& circuit_r) {
  if (circuit_f.role != circuit_role::forget)
    fail(errc::role_mismatch, "brute_force_localize expects the forget circuit first");
  if (circuit_r.role != circuit_role::retain)
    fail(errc::role_mismatch, "brute_force_localize expects the retain circuit second");

  std::set<neuron_id> universe(circuit_f.nodes.begin(), circuit_f.nodes.end());
  universe.insert(circuit_r.nodes.begin(), circuit_r.nodes.end());
  if (universe.size() > 20)
    fail(errc::too_large, "brute-force localization handles at most 20 distinct neurons, got " +
                              std::to_string(universe.size()));

  auto sf = simplify_adders(circuit_f);
  auto sr = simplify_adders(circuit_r);
  detail::compiled_circuit cf(sf), cr(sr);

  std::set<neuron_id> f_names(sf.nodes.begin(), sf.nodes.end());
  std::set<neuron_id> r_names(sr.nodes.begin(), sr.nodes.end());
  // One name as both outputs is pinned 0 and 1 at once: a conflict that no
  // candidate set needs to include, mirroring localize. A name that is an
  // output on one side only is a regular shared neuron.
  bool same_output = sf.output == sr.output;
  std::vector<neuron_id> shared;
  for (const auto& n : universe)
    if (f_names.count(n) && r_names.count(n) && !(same_output && n == sf.output))
      shared.push_back(n);
  int m = static_cast<int>(shared.size());

  auto is_source_in = [](const detail::compiled_circuit& c, const neuron_id& n) {
    auto it = c.index.find(n);
    return it != c.index.end() && c.kind[static_cast<size_t>(it->second)] < 0;
  };

  localization_report rep;
  for (int k = 0; k <= m; ++k) {
    std::vector<int> pick(static_cast<size_t>(k));
    std::iota(pick.begin(), pick.end(), 0);
    do {
      std::set<neuron_id> split;
      for (int i : pick) split.insert(shared[static_cast<size_t>(i)]);

      // bit slots: unsplit source names first, then per-side bits of split
      // sources, everything in name order
      struct slot {
        int f_idx = -1;
        int r_idx = -1;
      };
      std::vector<slot> slots;
      for (const auto& n : universe) {
        bool src_f = is_source_in(cf, n);
        bool src_r = is_source_in(cr, n);
        if (!src_f && !src_r) continue;
        if (split.count(n) || (same_output && n == sf.output)) {
          if (src_f) slots.push_back({cf.index.at(n), -1});
          if (src_r) slots.push_back({-1, cr.index.at(n)});
        } else {
          slots.push_back({src_f ? cf.index.at(n) : -1, src_r ? cr.index.at(n) : -1});
        }
      }

      std::vector<int> st_f(cf.kind.size()), st_r(cr.kind.size());
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << slots.size()); ++mask) {
        std::fill(st_f.begin(), st_f.end(), 0);
        std::fill(st_r.begin(), st_r.end(), 0);
        for (size_t b = 0; b < slots.size(); ++b) {
          int bit = static_cast<int>((mask >> b) & 1);
          if (slots[b].f_idx >= 0) st_f[static_cast<size_t>(slots[b].f_idx)] = bit;
          if (slots[b].r_idx >= 0) st_r[static_cast<size_t>(slots[b].r_idx)] = bit;
        }
        cf.forward(st_f);
        cr.forward(st_r);
        if (st_f[static_cast<size_t>(cf.out)] >= 1) continue;
        if (st_r[static_cast<size_t>(cr.out)] < 1) continue;
        bool consistent = true;
        for (const auto& n : shared) {
          if (split.count(n)) continue;
          if (st_f[static_cast<size_t>(cf.index.at(n))] != st_r[static_cast<size_t>(cr.index.at(n))]) {
            consistent = false;
            break;
          }
        }
        if (!consistent) continue;

        // witness found: this is the minimal, lexicographically first set
        std::set<neuron_id> touched;
        for (const auto& e : sf.edges) { touched.insert(e.first); touched.insert(e.second); }
        for (const auto& e : sr.edges) { touched.insert(e.first); touched.insert(e.second); }
        for (const auto& n : universe) {
          auto value_of = [&](const neuron_id& q) {
            return f_names.count(q) ? st_f[static_cast<size_t>(cf.index.at(q))]
                                    : st_r[static_cast<size_t>(cr.index.at(q))];
          };
          if ((same_output && n == sf.output) || split.count(n)) {
            rep.classes[n] = neuron_class::conflict;
            rep.conflict_values[n] = {
                f_names.count(n) ? st_f[static_cast<size_t>(cf.index.at(n))] : 0,
                r_names.count(n) ? st_r[static_cast<size_t>(cr.index.at(n))] : 0};
          } else if (n == sf.output) {
            rep.classes[n] = neuron_class::forget;
          } else if (n == sr.output) {
            rep.classes[n] = neuron_class::safe_retain;
          } else if (!touched.count(n)) {
            rep.classes[n] = neuron_class::safe_absent;
          } else {
            rep.classes[n] = value_of(n) >= 1 ? neuron_class::safe_retain : neuron_class::forget;
          }
        }
        rep.conflict_count = 0;
        for (const auto& [n, cls] : rep.classes)
          if (cls == neuron_class::conflict) ++rep.conflict_count;
        return rep;
      }
    } while (detail::next_combination(pick, m));
  }
  fail(errc::internal_error, "no split of the shared neurons admits a witness");
}

// Re-substitutes a report's values into gate semantics: every gate equation
// must hold side by side (conflict neurons use their per-side values) with
// the forget output at 0 and the retain output at 1.
inline bool report_is_sound(const localization_report& rep,
                            const logical_circuit& circuit_f,
                            const logical_circuit& circuit_r) {
  auto check_side = [&](const logical_circuit& c, bool forget_side) {
    auto sc = simplify_adders(c);
    auto value = [&](const neuron_id& n) -> int {
      auto it = rep.classes.find(n);
      if (it == rep.classes.end()) return -1;
      switch (it->second) {
        case neuron_class::conflict: {
          auto cv = rep.conflict_values.find(n);
          if (cv == rep.conflict_values.end()) return -1;
          return forget_side ? cv->second.forget_side : cv->second.retain_side;
        }
        case neuron_class::safe_retain: return 1;
        case neuron_class::forget: return 0;
        case neuron_class::safe_absent: return 0;
      }
      return -1;
    };
    for (const auto& n : sc.nodes) {
      if (sc.is_source(n)) continue;
      int expect = 0;
      switch (sc.gates.at(n)) {
        case gate_kind::AND: {
          expect = 1;
          for (const auto& s : sc.senders_of(n))
            if (value(s) < 1) { expect = 0; break; }
          break;
        }
        case gate_kind::OR: {
          for (const auto& s : sc.senders_of(n))
            if (value(s) >= 1) { expect = 1; break; }
          break;
        }
        case gate_kind::ADDER:
          return false;  // simplify_adders leaves none behind
      }
      if (value(n) != expect) return false;
    }
    return value(sc.output) == (forget_side ? 0 : 1);
  };
  return check_side(circuit_f, true) && check_side(circuit_r, false);
}

}  // namespace clue
