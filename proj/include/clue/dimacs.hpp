#pragma once

// DIMACS CNF reading/writing plus the JSON sidecar that maps variable
// indices back to neuron names.
//
// The format, for reference:
//
//   c optional comment lines
//   p cnf <variables> <clauses>
//   1 -3 4 0        each clause is a list of nonzero literals ended by 0
//   ...
//
// The writer emits clauses in the formula's stored (canonical) order, so
// output bytes are stable for a given formula.

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "clue/cnf.hpp"
#include "clue/error.hpp"

namespace clue {
namespace dimacs {

inline void write(const cnf_formula& f, std::ostream& os) {
  os << "p cnf " << f.var_count << " " << f.clauses.size() << "\n";
  for (const auto& cl : f.clauses) {
    for (const auto& l : cl.lits) os << (l.negated ? -l.var : l.var) << " ";
    os << "0\n";
  }
}

inline std::string write_string(const cnf_formula& f) {
  std::ostringstream os;
  write(f, os);
  return os.str();
}

inline cnf_formula read(std::istream& is) {
  cnf_formula f;
  std::string tok;
  int declared_vars = -1;
  long declared_clauses = -1;
  std::vector<literal> current;

  while (is >> tok) {
    if (tok == "c") {
      std::string rest;
      std::getline(is, rest);
      continue;
    }
    if (tok == "p") {
      std::string fmt;
      if (!(is >> fmt >> declared_vars >> declared_clauses) || fmt != "cnf")
        fail(errc::parse_error, "malformed problem line");
      if (declared_vars < 0 || declared_clauses < 0)
        fail(errc::parse_error, "negative counts in problem line");
      continue;
    }
    long v = 0;
    try {
      v = std::stol(tok);
    } catch (const std::exception&) {
      fail(errc::parse_error, "unexpected token: " + tok);
    }
    if (declared_vars < 0) fail(errc::parse_error, "clause before problem line");
    if (v == 0) {
      if (current.empty()) fail(errc::parse_error, "empty clause in input");
      try {
        f.add_clause(std::move(current));
      } catch (const error& e) {
        // malformed input, not an internal bug
        fail(errc::parse_error, e.what());
      }
      current.clear();
    } else {
      int var = static_cast<int>(v < 0 ? -v : v);
      if (var > declared_vars)
        fail(errc::parse_error, "literal " + tok + " exceeds declared variable count");
      current.push_back({var, v < 0});
    }
  }
  if (!current.empty()) fail(errc::parse_error, "clause missing terminating 0");
  if (declared_vars < 0) fail(errc::parse_error, "missing problem line");
  if (declared_clauses != static_cast<long>(f.clauses.size()))
    fail(errc::parse_error, "clause count does not match problem line");
  f.var_count = declared_vars;
  return f;
}

inline cnf_formula read_string(const std::string& text) {
  std::istringstream is(text);
  return read(is);
}

// Sidecar: {"var_count": N, "vars": {"1": "A", ...}} in ascending var order.
inline nlohmann::ordered_json sidecar_json(const cnf_formula& f) {
  nlohmann::ordered_json j;
  j["var_count"] = f.var_count;
  j["vars"] = nlohmann::ordered_json::object();
  for (size_t i = 0; i < f.names.size(); ++i)
    j["vars"][std::to_string(i + 1)] = f.names[i];
  return j;
}

inline void apply_sidecar(cnf_formula& f, const nlohmann::ordered_json& j) {
  try {
    const auto& vars = j.at("vars");
    f.names.assign(f.var_count, "");
    f.var_of.clear();
    for (const auto& [k, v] : vars.items()) {
      int var = std::stoi(k);
      if (var < 1 || var > f.var_count)
        fail(errc::parse_error, "sidecar variable out of range: " + k);
      f.names[var - 1] = v.get<std::string>();
      f.var_of[f.names[var - 1]] = var;
    }
  } catch (const nlohmann::json::exception& e) {
    fail(errc::parse_error, std::string("bad sidecar JSON: ") + e.what());
  }
}

}  // namespace dimacs
}  // namespace clue
