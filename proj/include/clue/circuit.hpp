#pragma once

// Logical gate networks: named neurons wired into a DAG of AND / OR / ADDER
// gates with a single designated output. Circuits are validated and brought
// into canonical order by build_circuit and treated as immutable afterwards;
// all operations on them are pure.

#include <algorithm>
#include <cassert>
#include <compare>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "clue/error.hpp"

namespace clue {

struct neuron_id {
  std::string name;
  auto operator<=>(const neuron_id&) const = default;
};

enum class gate_kind { AND, OR, ADDER };
enum class circuit_role { untagged, forget, retain };

// AND/OR nodes and sources hold 0/1; an ADDER node holds 0..fan-in.
using activation_state = int;

// A downstream gate treats any state >= 1 as an active input.
inline bool binarize(activation_state v) { return v >= 1; }

inline const char* gate_kind_name(gate_kind k) {
  switch (k) {
    case gate_kind::AND: return "AND";
    case gate_kind::OR: return "OR";
    case gate_kind::ADDER: return "ADDER";
  }
  return "?";
}

inline const char* circuit_role_name(circuit_role r) {
  switch (r) {
    case circuit_role::untagged: return "untagged";
    case circuit_role::forget: return "forget";
    case circuit_role::retain: return "retain";
  }
  return "?";
}

using circuit_edge = std::pair<neuron_id, neuron_id>;  // sender -> receiver

// Construct via build_circuit; `nodes` ends up in canonical topological
// order (lexicographic tie-break) and `edges` sorted by (sender, receiver),
// so iteration order is fixed for every circuit-derived artifact.
struct logical_circuit {
  std::vector<neuron_id> nodes;
  std::vector<circuit_edge> edges;
  std::map<neuron_id, gate_kind> gates;
  neuron_id output;
  circuit_role role = circuit_role::untagged;

  // derived by build_circuit: senders of each node, sorted by name
  std::map<neuron_id, std::vector<neuron_id>> incoming;

  bool is_source(const neuron_id& n) const {
    auto it = incoming.find(n);
    return it == incoming.end() || it->second.empty();
  }

  const std::vector<neuron_id>& senders_of(const neuron_id& n) const {
    static const std::vector<neuron_id> none;
    auto it = incoming.find(n);
    return it == incoming.end() ? none : it->second;
  }

  std::vector<neuron_id> sources() const {
    std::vector<neuron_id> out;
    for (const auto& n : nodes)
      if (is_source(n)) out.push_back(n);
    return out;
  }

  bool has_adders() const {
    for (const auto& [n, k] : gates)
      if (k == gate_kind::ADDER) return true;
    return false;
  }
};

inline logical_circuit build_circuit(std::vector<neuron_id> nodes,
                                     std::vector<circuit_edge> edges,
                                     std::map<neuron_id, gate_kind> gates,
                                     neuron_id output,
                                     circuit_role role) {
  std::set<neuron_id> node_set;
  for (const auto& n : nodes) {
    if (n.name.empty()) fail(errc::unknown_node, "empty neuron name");
    if (!node_set.insert(n).second)
      fail(errc::duplicate_node, "node listed twice: " + n.name);
  }
  if (!node_set.count(output))
    fail(errc::unknown_node, "output not in node list: " + output.name);
  for (const auto& [g, k] : gates) {
    (void)k;
    if (!node_set.count(g))
      fail(errc::unknown_node, "gate on unknown node: " + g.name);
  }

  std::sort(edges.begin(), edges.end());
  std::map<neuron_id, std::vector<neuron_id>> incoming;
  std::map<neuron_id, int> out_degree;
  for (size_t i = 0; i < edges.size(); ++i) {
    const auto& [s, r] = edges[i];
    if (!node_set.count(s) || !node_set.count(r))
      fail(errc::unknown_node, "edge references unknown node: " + s.name + " -> " + r.name);
    if (s == r) fail(errc::cycle_detected, "self-edge on " + s.name);
    if (i > 0 && edges[i] == edges[i - 1])
      fail(errc::duplicate_edge, s.name + " -> " + r.name);
    incoming[r].push_back(s);
    out_degree[s]++;
  }
  if (out_degree.count(output) && out_degree[output] > 0)
    fail(errc::output_has_successor, output.name);

  // Kahn's algorithm over a sorted frontier gives the canonical order
  // directly: topological, lexicographic among equally-ready nodes.
  std::map<neuron_id, int> pending;
  for (const auto& n : nodes) pending[n] = 0;
  for (const auto& [s, r] : edges) pending[r]++;
  std::set<neuron_id> ready;
  for (const auto& [n, d] : pending)
    if (d == 0) ready.insert(n);
  std::map<neuron_id, std::vector<neuron_id>> outgoing;
  for (const auto& [s, r] : edges) outgoing[s].push_back(r);

  std::vector<neuron_id> order;
  order.reserve(nodes.size());
  while (!ready.empty()) {
    neuron_id n = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(n);
    for (const auto& r : outgoing[n])
      if (--pending[r] == 0) ready.insert(r);
  }
  if (order.size() != nodes.size()) fail(errc::cycle_detected, "circuit has a cycle");

  for (const auto& n : order) {
    bool source = !incoming.count(n) || incoming[n].empty();
    bool gated = gates.count(n) > 0;
    if (source && gated) fail(errc::gate_on_source, n.name);
    if (!source && !gated) fail(errc::missing_gate, n.name);
  }
  for (auto& [n, senders] : incoming) {
    (void)n;
    std::sort(senders.begin(), senders.end());
  }

  logical_circuit c;
  c.nodes = std::move(order);
  c.edges = std::move(edges);
  c.gates = std::move(gates);
  c.output = std::move(output);
  c.role = role;
  c.incoming = std::move(incoming);
  return c;
}

// Full forward pass. `source_states` must give a 0/1 state for every source
// node and nothing else; the result maps every node to its state.
inline std::map<neuron_id, activation_state> evaluate(
    const logical_circuit& c, const std::map<neuron_id, activation_state>& source_states) {
  for (const auto& [n, v] : source_states) {
    bool known = std::find(c.nodes.begin(), c.nodes.end(), n) != c.nodes.end();
    if (!known || !c.is_source(n))
      fail(errc::unknown_source, "state given for non-source: " + n.name);
    if (v != 0 && v != 1)
      fail(errc::invalid_state, n.name + " source state must be 0 or 1");
  }

  std::map<neuron_id, activation_state> state;
  for (const auto& n : c.nodes) {
    if (c.is_source(n)) {
      auto it = source_states.find(n);
      if (it == source_states.end())
        fail(errc::missing_source_state, n.name);
      state[n] = it->second;
      continue;
    }
    const auto& senders = c.senders_of(n);
    assert(!senders.empty());
    int active = 0;
    for (const auto& s : senders) active += binarize(state.at(s)) ? 1 : 0;
    switch (c.gates.at(n)) {
      case gate_kind::AND:
        state[n] = active == static_cast<int>(senders.size()) ? 1 : 0;
        break;
      case gate_kind::OR:
        state[n] = active > 0 ? 1 : 0;
        break;
      case gate_kind::ADDER:
        state[n] = active;
        break;
    }
  }
  return state;
}

// Role-directed removal of ADDER gates: in a forget circuit an ADDER only
// needs one active sender to matter (OR), in a retain circuit it must keep
// all of them (AND). Idempotent; nodes, edges and output are untouched.
inline logical_circuit simplify_adders(const logical_circuit& c) {
  if (c.role == circuit_role::untagged)
    fail(errc::untagged_role, "cannot simplify adders without a role");
  logical_circuit out = c;
  gate_kind target = c.role == circuit_role::forget ? gate_kind::OR : gate_kind::AND;
  for (auto& [n, k] : out.gates) {
    (void)n;
    if (k == gate_kind::ADDER) k = target;
  }
  return out;
}

}  // namespace clue
