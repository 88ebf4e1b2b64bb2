#pragma once

// CNF construction for circuits: per-gate constraint clauses, whole-circuit
// transformation, and composition of a forget/retain pair into the combined
// query formula (forget output forced 0, retain output forced 1).
//
// Variable numbering is owned by a shared var_allocator so that neurons with
// the same name get the same variable across both circuits. Output nodes are
// the one exception: they map to the reserved names "output_f" / "output_r"
// of their role, which keeps the two output constraints on distinct
// variables even when both circuits name their output identically.

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "clue/circuit.hpp"
#include "clue/error.hpp"

namespace clue {

inline constexpr const char* output_f_name = "output_f";
inline constexpr const char* output_r_name = "output_r";

struct literal {
  int var = 0;  // 1-based
  bool negated = false;

  auto operator<=>(const literal&) const = default;
};

inline literal pos(int var) { return {var, false}; }
inline literal neg(int var) { return {var, true}; }

struct clause {
  std::vector<literal> lits;  // sorted by (var, negated), no duplicates

  auto operator<=>(const clause&) const = default;
};

// Sort and deduplicate. Empty or tautological clauses indicate a bug in the
// producing code, never a property of valid input, so they throw.
inline clause make_clause(std::vector<literal> lits) {
  for (const auto& l : lits)
    if (l.var < 1) fail(errc::internal_error, "literal with variable < 1");
  std::sort(lits.begin(), lits.end());
  lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
  if (lits.empty()) fail(errc::internal_error, "empty clause");
  for (size_t i = 1; i < lits.size(); ++i)
    if (lits[i].var == lits[i - 1].var)
      fail(errc::internal_error, "tautological clause on variable " +
                                     std::to_string(lits[i].var));
  return clause{std::move(lits)};
}

// Hands out 1-based variable indices, one per distinct name, in first-use
// order. Formulas remember which allocator numbered them; composing
// formulas from different allocators is meaningless and rejected.
class var_allocator {
 public:
  var_allocator() : id_(next_id()) {}

  int var_for(const std::string& name) {
    auto it = by_name_.find(name);
    if (it != by_name_.end()) return it->second;
    names_.push_back(name);
    int v = static_cast<int>(names_.size());
    by_name_.emplace(name, v);
    return v;
  }

  // 0 when the name was never allocated
  int lookup(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? 0 : it->second;
  }

  int var_count() const { return static_cast<int>(names_.size()); }
  const std::string& name_of(int var) const { return names_.at(var - 1); }
  const std::vector<std::string>& names() const { return names_; }
  std::uint64_t id() const { return id_; }

 private:
  static std::uint64_t next_id() {
    static std::uint64_t counter = 0;
    return ++counter;
  }

  std::uint64_t id_;
  std::map<std::string, int> by_name_;
  std::vector<std::string> names_;
};

struct cnf_formula {
  int var_count = 0;
  std::vector<clause> clauses;
  std::vector<std::string> names;  // names[v-1]; may be empty for raw DIMACS
  std::map<std::string, int> var_of;
  std::uint64_t allocator_id = 0;
  circuit_role role = circuit_role::untagged;
  bool adders_simplified = false;

  void add_clause(std::vector<literal> lits) {
    clauses.push_back(make_clause(std::move(lits)));
    for (const auto& l : clauses.back().lits) var_count = std::max(var_count, l.var);
  }

  int var_for_name(const std::string& name) const {
    auto it = var_of.find(name);
    if (it == var_of.end()) fail(errc::missing_output_var, name + " not in formula");
    return it->second;
  }

  void adopt_names(const var_allocator& alloc) {
    names = alloc.names();
    var_of.clear();
    for (size_t i = 0; i < names.size(); ++i) var_of[names[i]] = static_cast<int>(i) + 1;
    var_count = std::max(var_count, alloc.var_count());
    allocator_id = alloc.id();
  }
};

// Constraint clauses tying a gate's output variable to its input variables.
// For c = AND(x1..xn):  (~x1 | .. | ~xn | c) and (xi | ~c) for each i.
// For c = OR(x1..xn):   (x1 | .. | xn | ~c) and (~xi | c) for each i.
inline std::vector<clause> tseitin_gate(gate_kind kind, int output_var,
                                        const std::vector<int>& input_vars) {
  if (input_vars.empty()) fail(errc::empty_inputs, "gate with no inputs");
  if (kind == gate_kind::ADDER)
    fail(errc::adder_not_simplified, "ADDER gates must be simplified before CNF");

  std::vector<clause> out;
  std::vector<literal> big;
  big.reserve(input_vars.size() + 1);
  if (kind == gate_kind::AND) {
    for (int x : input_vars) big.push_back(neg(x));
    big.push_back(pos(output_var));
    out.push_back(make_clause(big));
    for (int x : input_vars) out.push_back(make_clause({pos(x), neg(output_var)}));
  } else {
    for (int x : input_vars) big.push_back(pos(x));
    big.push_back(neg(output_var));
    out.push_back(make_clause(big));
    for (int x : input_vars) out.push_back(make_clause({neg(x), pos(output_var)}));
  }
  return out;
}

inline const char* reserved_output_name(circuit_role role) {
  assert(role != circuit_role::untagged);
  return role == circuit_role::forget ? output_f_name : output_r_name;
}

// Whole-circuit transformation. ADDER gates are simplified internally
// according to the circuit's role (recorded on the result); variables are
// allocated in canonical node order so numbering is reproducible.
inline cnf_formula circuit_to_cnf(const logical_circuit& circuit, var_allocator& alloc) {
  if (circuit.role == circuit_role::untagged)
    fail(errc::untagged_role, "circuit must be tagged forget or retain");

  bool had_adders = circuit.has_adders();
  logical_circuit c = had_adders ? simplify_adders(circuit) : circuit;

  const std::string out_name = reserved_output_name(c.role);
  for (const auto& n : c.nodes) {
    bool is_reserved = n.name == output_f_name || n.name == output_r_name;
    if (is_reserved && !(n == c.output && n.name == out_name))
      fail(errc::reserved_name, n.name + " collides with a reserved output variable");
  }

  cnf_formula f;
  f.role = c.role;
  f.adders_simplified = had_adders;

  std::map<neuron_id, int> var;
  for (const auto& n : c.nodes)
    var[n] = alloc.var_for(n == c.output ? out_name : n.name);

  for (const auto& n : c.nodes) {
    if (c.is_source(n)) continue;
    std::vector<int> inputs;
    for (const auto& s : c.senders_of(n)) inputs.push_back(var.at(s));
    for (auto& cl : tseitin_gate(c.gates.at(n), var.at(n), inputs))
      f.clauses.push_back(std::move(cl));
  }
  f.adopt_names(alloc);
  return f;
}

// Union of both circuits' constraints plus the two output units: the forget
// circuit must be inactive while the retain circuit fires. Duplicate clauses
// (shared substructure encoded identically on both sides) collapse to one.
inline cnf_formula compose_phi(const cnf_formula& phi_f, const cnf_formula& phi_r) {
  if (phi_f.allocator_id == 0 || phi_f.allocator_id != phi_r.allocator_id)
    fail(errc::allocator_mismatch, "formulas were numbered by different allocators");
  if (phi_f.role != circuit_role::forget || phi_r.role != circuit_role::retain)
    fail(errc::role_mismatch, "compose expects a forget formula and a retain formula");

  cnf_formula phi;
  phi.allocator_id = phi_f.allocator_id;
  phi.adders_simplified = phi_f.adders_simplified || phi_r.adders_simplified;

  std::set<clause> seen;
  for (const auto* part : {&phi_f, &phi_r})
    for (const auto& cl : part->clauses)
      if (seen.insert(cl).second) phi.clauses.push_back(cl);

  phi.names = phi_f.names.size() >= phi_r.names.size() ? phi_f.names : phi_r.names;
  for (size_t i = 0; i < phi.names.size(); ++i)
    phi.var_of[phi.names[i]] = static_cast<int>(i) + 1;
  phi.var_count = std::max({phi_f.var_count, phi_r.var_count,
                            static_cast<int>(phi.names.size())});

  auto it_f = phi.var_of.find(output_f_name);
  auto it_r = phi.var_of.find(output_r_name);
  if (it_f == phi.var_of.end())
    fail(errc::missing_output_var, output_f_name);
  if (it_r == phi.var_of.end())
    fail(errc::missing_output_var, output_r_name);
  phi.add_clause({neg(it_f->second)});
  phi.add_clause({pos(it_r->second)});
  return phi;
}

}  // namespace clue
