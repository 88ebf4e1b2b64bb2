#pragma once

#include <stdexcept>
#include <string>

namespace clue {

// Every way a library call can reject its input or detect a broken
// internal invariant. Keeping one flat enum makes error kinds cheap to
// assert on in tests and to map onto process exit codes in the CLI.
enum class errc {
  // circuit construction / evaluation
  cycle_detected,
  output_has_successor,
  missing_gate,
  gate_on_source,
  duplicate_edge,
  duplicate_node,
  unknown_node,
  missing_source_state,
  unknown_source,
  invalid_state,
  untagged_role,
  // discovery
  unknown_edge,
  empty_sample_set,
  mixed_evidence,
  // cnf transformation
  adder_not_simplified,
  empty_inputs,
  reserved_name,
  allocator_mismatch,
  missing_output_var,
  // localization
  role_mismatch,
  too_large,
  // mask / schedule emission
  unmapped_neuron,
  index_out_of_bounds,
  invalid_config,
  // serialization
  parse_error,
  // should-never-happen states (bugs, not bad input)
  internal_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::cycle_detected: return "cycle_detected";
    case errc::output_has_successor: return "output_has_successor";
    case errc::missing_gate: return "missing_gate";
    case errc::gate_on_source: return "gate_on_source";
    case errc::duplicate_edge: return "duplicate_edge";
    case errc::duplicate_node: return "duplicate_node";
    case errc::unknown_node: return "unknown_node";
    case errc::missing_source_state: return "missing_source_state";
    case errc::unknown_source: return "unknown_source";
    case errc::invalid_state: return "invalid_state";
    case errc::untagged_role: return "untagged_role";
    case errc::unknown_edge: return "unknown_edge";
    case errc::empty_sample_set: return "empty_sample_set";
    case errc::mixed_evidence: return "mixed_evidence";
    case errc::adder_not_simplified: return "adder_not_simplified";
    case errc::empty_inputs: return "empty_inputs";
    case errc::reserved_name: return "reserved_name";
    case errc::allocator_mismatch: return "allocator_mismatch";
    case errc::missing_output_var: return "missing_output_var";
    case errc::role_mismatch: return "role_mismatch";
    case errc::too_large: return "too_large";
    case errc::unmapped_neuron: return "unmapped_neuron";
    case errc::index_out_of_bounds: return "index_out_of_bounds";
    case errc::invalid_config: return "invalid_config";
    case errc::parse_error: return "parse_error";
    case errc::internal_error: return "internal_error";
  }
  return "unknown";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
        code_(code) {}

  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& detail) {
  throw error(code, detail);
}

}  // namespace clue
