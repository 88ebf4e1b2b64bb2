#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "clue/cnf.hpp"
#include "clue/dimacs.hpp"
#include "clue/solver.hpp"
#include "support.hpp"

using namespace clue;

namespace {

// signed-literal view of a clause for compact expectations
std::vector<int> signed_lits(const clause& cl) {
  std::vector<int> out;
  for (const auto& l : cl.lits) out.push_back(l.negated ? -l.var : l.var);
  return out;
}

std::vector<std::vector<int>> signed_clauses(const cnf_formula& f) {
  std::vector<std::vector<int>> out;
  for (const auto& cl : f.clauses) out.push_back(signed_lits(cl));
  return out;
}

}  // namespace

TEST_CASE("make_clause sorts, deduplicates, and rejects degenerate clauses") {
  auto cl = make_clause({pos(3), neg(1), pos(3), pos(2)});
  CHECK(signed_lits(cl) == std::vector<int>{-1, 2, 3});
  CHECK_THROWS_AS(make_clause({}), error);
  CHECK_THROWS_AS(make_clause({pos(1), neg(1)}), error);  // tautology
  CHECK_THROWS_AS(make_clause({pos(0)}), error);          // variables are 1-based
}

TEST_CASE("gate constraint clauses tie output to inputs both ways") {
  // c = AND(x1, x2): (~x1 | ~x2 | c), (x1 | ~c), (x2 | ~c)
  auto and_clauses = tseitin_gate(gate_kind::AND, 3, {1, 2});
  REQUIRE(and_clauses.size() == 3);
  CHECK(signed_lits(and_clauses[0]) == std::vector<int>{-1, -2, 3});
  CHECK(signed_lits(and_clauses[1]) == std::vector<int>{1, -3});
  CHECK(signed_lits(and_clauses[2]) == std::vector<int>{2, -3});

  // c = OR(x1, x2): (x1 | x2 | ~c), (~x1 | c), (~x2 | c)
  auto or_clauses = tseitin_gate(gate_kind::OR, 3, {1, 2});
  REQUIRE(or_clauses.size() == 3);
  CHECK(signed_lits(or_clauses[0]) == std::vector<int>{1, 2, -3});
  CHECK(signed_lits(or_clauses[1]) == std::vector<int>{-1, 3});
  CHECK(signed_lits(or_clauses[2]) == std::vector<int>{-2, 3});

  CHECK_THROWS_AS(tseitin_gate(gate_kind::ADDER, 3, {1, 2}), error);
  CHECK_THROWS_AS(tseitin_gate(gate_kind::AND, 1, {}), error);
}

TEST_CASE("the two-input AND/OR pair composes into the expected eight clauses") {
  auto pair = support::and_or_pair();
  var_allocator alloc;
  auto phi_f = circuit_to_cnf(pair.forget, alloc);
  auto phi_r = circuit_to_cnf(pair.retain, alloc);

  // canonical numbering: A=1, B=2, then the reserved output variables
  CHECK(alloc.lookup("A") == 1);
  CHECK(alloc.lookup("B") == 2);
  CHECK(alloc.lookup(output_f_name) == 3);
  CHECK(alloc.lookup(output_r_name) == 4);

  auto phi = compose_phi(phi_f, phi_r);
  CHECK(phi.var_count == 4);
  CHECK(signed_clauses(phi) ==
        std::vector<std::vector<int>>{{-1, -2, 3},
                                      {1, -3},
                                      {2, -3},
                                      {1, 2, -4},
                                      {-1, 4},
                                      {-2, 4},
                                      {-3},
                                      {4}});

  // exactly two models: break A and keep B, or the reverse
  auto models = support::tt_models(phi);
  // bit layout: A=bit0, B=bit1, output_f=bit2, output_r=bit3
  CHECK(models == std::vector<std::uint32_t>{0b1001, 0b1010});
}

TEST_CASE("circuit transformation requires a role and allocates every node") {
  auto untagged = support::layered_example();
  var_allocator alloc;
  CHECK_THROWS_AS(circuit_to_cnf(untagged, alloc), error);

  auto retain = support::layered_example(circuit_role::retain);
  var_allocator alloc2;
  auto f = circuit_to_cnf(retain, alloc2);
  CHECK(f.role == circuit_role::retain);
  CHECK(f.adders_simplified);  // the output gate was additive
  CHECK(f.var_count == static_cast<int>(retain.nodes.size()));
  for (const auto& n : retain.nodes) {
    const std::string& key = n == retain.output ? output_r_name : n.name;
    CHECK(f.var_for_name(key) >= 1);
  }
  CHECK_THROWS_AS(f.var_for_name("no_such_neuron"), error);
}

TEST_CASE("reserved output names are rejected on ordinary nodes") {
  var_allocator alloc;
  auto bad = build_circuit({{"output_r"}, {"b"}, {"g"}},
                           {{{"output_r"}, {"g"}}, {{"b"}, {"g"}}},
                           {{{"g"}, gate_kind::AND}}, {"g"}, circuit_role::forget);
  CHECK_THROWS_AS(circuit_to_cnf(bad, alloc), error);

  // a forget output literally named output_f is the one permitted use
  var_allocator alloc2;
  auto ok = build_circuit({{"a"}, {"b"}, {"output_f"}},
                          {{{"a"}, {"output_f"}}, {{"b"}, {"output_f"}}},
                          {{{"output_f"}, gate_kind::AND}}, {"output_f"},
                          circuit_role::forget);
  CHECK(circuit_to_cnf(ok, alloc2).var_for_name(output_f_name) == 3);
}

TEST_CASE("composition validates allocators, roles, and output variables") {
  auto pair = support::and_or_pair();
  var_allocator a1, a2;
  auto f1 = circuit_to_cnf(pair.forget, a1);
  auto r2 = circuit_to_cnf(pair.retain, a2);
  CHECK_THROWS_AS(compose_phi(f1, r2), error);  // numbered by different allocators
  try {
    compose_phi(f1, r2);
  } catch (const error& e) {
    CHECK(e.code() == errc::allocator_mismatch);
  }

  auto r1 = circuit_to_cnf(pair.retain, a1);
  CHECK_THROWS_AS(compose_phi(r1, f1), error);  // sides swapped
  try {
    compose_phi(r1, f1);
  } catch (const error& e) {
    CHECK(e.code() == errc::role_mismatch);
  }
}

TEST_CASE("composition collapses clauses shared by both sides") {
  // both circuits contain the same AND gate over the same senders, so its
  // three constraint clauses appear once in the composition
  auto sub = [](circuit_role role, const char* out, gate_kind top) {
    return build_circuit({{"a"}, {"b"}, {"h"}, {out}},
                         {{{"a"}, {"h"}}, {{"b"}, {"h"}}, {{"h"}, {out}}, {{"a"}, {out}}},
                         {{{"h"}, gate_kind::AND}, {{neuron_id{out}}, top}}, {out}, role);
  };
  var_allocator alloc;
  auto phi_f = circuit_to_cnf(sub(circuit_role::forget, "fo", gate_kind::OR), alloc);
  auto phi_r = circuit_to_cnf(sub(circuit_role::retain, "ro", gate_kind::AND), alloc);
  auto phi = compose_phi(phi_f, phi_r);
  // 3 shared clauses for h, 3 + 3 for the two output gates, 2 output units
  CHECK(phi.clauses.size() == 11);
  CHECK(phi_f.clauses.size() + phi_r.clauses.size() == 12);
}

TEST_CASE("transformed circuits are equisatisfiable with direct evaluation") {
  // the model set of a transformed circuit, projected onto its variables,
  // is exactly the image of exhaustive forward evaluation
  std::mt19937_64 rng(414243);
  for (int trial = 0; trial < 40; ++trial) {
    auto role = trial % 2 == 0 ? circuit_role::forget : circuit_role::retain;
    auto c = support::random_tree(2 + static_cast<int>(rng() % 7), rng,
                                  {gate_kind::AND, gate_kind::OR, gate_kind::ADDER},
                                  {gate_kind::AND, gate_kind::OR, gate_kind::ADDER}, role);
    var_allocator alloc;
    auto f = circuit_to_cnf(c, alloc);
    CHECK(support::tt_models(f) == support::eval_image(c, f));
  }
}

TEST_CASE("DIMACS output parses back to the identical formula") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = support::random_3cnf(5 + static_cast<int>(rng() % 10),
                                  8 + static_cast<int>(rng() % 30), rng);
    auto text = dimacs::write_string(f);
    auto back = dimacs::read_string(text);
    CHECK(back.var_count == f.var_count);
    CHECK(back.clauses == f.clauses);
    CHECK(dimacs::write_string(back) == text);
  }
}

TEST_CASE("DIMACS reading accepts comments and rejects malformed input") {
  auto f = dimacs::read_string("c a comment\np cnf 3 2\nc another\n1 -2 0\n2 3 0\n");
  CHECK(f.var_count == 3);
  REQUIRE(f.clauses.size() == 2);
  CHECK(signed_lits(f.clauses[0]) == std::vector<int>{1, -2});

  auto code_of = [](const std::string& text) {
    try {
      dimacs::read_string(text);
    } catch (const error& e) {
      return e.code();
    }
    return errc::internal_error;
  };
  CHECK(code_of("") == errc::parse_error);                        // no problem line
  CHECK(code_of("1 2 0\np cnf 2 1\n") == errc::parse_error);      // clause first
  CHECK(code_of("p cnf 2 1\n1 3 0\n") == errc::parse_error);      // var out of range
  CHECK(code_of("p cnf 2 1\n1 2\n") == errc::parse_error);        // missing terminator
  CHECK(code_of("p cnf 2 2\n1 2 0\n") == errc::parse_error);      // count mismatch
  CHECK(code_of("p cnf 2 1\n0\n") == errc::parse_error);          // empty clause
  CHECK(code_of("p cnf 2 1\nx y 0\n") == errc::parse_error);      // junk token
  CHECK(code_of("p dnf 2 1\n1 2 0\n") == errc::parse_error);      // wrong format tag
  CHECK(code_of("p cnf 2 1\n1 -1 0\n") == errc::parse_error);     // tautology
}

TEST_CASE("the sidecar carries variable names across a DIMACS round-trip") {
  auto pair = support::and_or_pair();
  var_allocator alloc;
  auto phi_f = circuit_to_cnf(pair.forget, alloc);  // allocates A=1 B=2 fo=3
  auto phi_r = circuit_to_cnf(pair.retain, alloc);  // then ro=4
  auto phi = compose_phi(phi_f, phi_r);

  auto side = dimacs::sidecar_json(phi);
  CHECK(side.at("var_count") == 4);
  CHECK(side.at("vars").at("1") == "A");
  CHECK(side.at("vars").at("3") == output_f_name);

  auto bare = dimacs::read_string(dimacs::write_string(phi));
  CHECK(bare.names.empty());
  dimacs::apply_sidecar(bare, side);
  CHECK(bare.var_for_name("B") == 2);
  CHECK(bare.var_for_name(output_r_name) == 4);

  nlohmann::ordered_json broken = {{"vars", {{"9", "X"}}}};
  CHECK_THROWS_AS(dimacs::apply_sidecar(bare, broken), error);
  nlohmann::ordered_json missing = {{"var_count", 4}};
  CHECK_THROWS_AS(dimacs::apply_sidecar(bare, missing), error);
}
