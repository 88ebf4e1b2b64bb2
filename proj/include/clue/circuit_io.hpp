#pragma once

// Circuit <-> JSON. Serialization always emits the canonical form (nodes in
// topological order, edges sorted), so parse -> serialize is byte-stable.

#include <string>
#include <vector>

#include <json.hpp>

#include "clue/circuit.hpp"
#include "clue/error.hpp"

namespace clue {

using json = nlohmann::ordered_json;

inline json circuit_to_json(const logical_circuit& c) {
  json j;
  j["nodes"] = json::array();
  for (const auto& n : c.nodes) j["nodes"].push_back(n.name);
  j["edges"] = json::array();
  for (const auto& [s, r] : c.edges) j["edges"].push_back({s.name, r.name});
  j["gates"] = json::object();
  for (const auto& n : c.nodes) {
    auto it = c.gates.find(n);
    if (it != c.gates.end()) j["gates"][n.name] = gate_kind_name(it->second);
  }
  j["output"] = c.output.name;
  if (c.role == circuit_role::untagged)
    j["role"] = nullptr;
  else
    j["role"] = circuit_role_name(c.role);
  return j;
}

inline std::string serialize_circuit(const logical_circuit& c) {
  return circuit_to_json(c).dump(2) + "\n";
}

inline gate_kind parse_gate_kind(const std::string& s) {
  if (s == "AND") return gate_kind::AND;
  if (s == "OR") return gate_kind::OR;
  if (s == "ADDER") return gate_kind::ADDER;
  fail(errc::parse_error, "unknown gate kind: " + s);
}

// Parsing re-runs full validation via build_circuit, so a loaded circuit is
// exactly as trustworthy as a programmatically built one.
inline logical_circuit circuit_from_json(const json& j) {
  try {
    std::vector<neuron_id> nodes;
    for (const auto& n : j.at("nodes")) nodes.push_back({n.get<std::string>()});
    std::vector<circuit_edge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2)
        fail(errc::parse_error, "edge must be a [sender, receiver] pair");
      edges.push_back({{e[0].get<std::string>()}, {e[1].get<std::string>()}});
    }
    std::map<neuron_id, gate_kind> gates;
    for (const auto& [name, kind] : j.at("gates").items())
      gates[{name}] = parse_gate_kind(kind.get<std::string>());
    neuron_id output{j.at("output").get<std::string>()};
    circuit_role role = circuit_role::untagged;
    if (j.contains("role") && !j.at("role").is_null()) {
      std::string r = j.at("role").get<std::string>();
      if (r == "forget")
        role = circuit_role::forget;
      else if (r == "retain")
        role = circuit_role::retain;
      else
        fail(errc::parse_error, "unknown role: " + r);
    }
    return build_circuit(std::move(nodes), std::move(edges), std::move(gates),
                         std::move(output), role);
  } catch (const json::exception& e) {
    fail(errc::parse_error, std::string("bad circuit JSON: ") + e.what());
  }
}

inline logical_circuit parse_circuit(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(errc::parse_error, std::string("invalid JSON: ") + e.what());
  }
  return circuit_from_json(j);
}

}  // namespace clue
