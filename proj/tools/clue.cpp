// clue: conflict-guided neuron localization over planted logical gate
// networks, end to end. Subcommands cover the whole pipeline:
//
//   gen       emit a random planted network as circuit JSON
//   discover  recover a circuit from a network via noising/denoising sweeps
//   to-cnf    transform circuits to DIMACS (single role or composed pair)
//   solve     run the CDCL solver on a DIMACS file
//   localize  classify every neuron and extract the minimal conflict set
//   emit      turn a report plus a model layout into masks and a schedule
//   verify    cross-check localize against the brute-force oracle
//
// Machine-readable results go to --output (stdout when omitted); the human
// summary goes to the other stream so stdout stays parseable. Exit codes:
// 0 success, 1 usage, 2 rejected input, 3 broken invariant or a verify
// mismatch.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clue/circuit.hpp"
#include "clue/circuit_io.hpp"
#include "clue/cnf.hpp"
#include "clue/dimacs.hpp"
#include "clue/discovery.hpp"
#include "clue/error.hpp"
#include "clue/localization.hpp"
#include "clue/masks.hpp"
#include "clue/provenance.hpp"
#include "clue/report_io.hpp"
#include "clue/solver.hpp"

namespace {

using json = nlohmann::ordered_json;
using clue::errc;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) clue::fail(errc::parse_error, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) clue::fail(errc::parse_error, "cannot write " + path);
  out << text;
  out.flush();
  if (!out) clue::fail(errc::parse_error, "short write to " + path);
}

json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    clue::fail(errc::parse_error, what + " is not valid JSON: " + e.what());
  }
}

// Global flags shared by every subcommand.
struct run_options {
  std::uint64_t seed = 0;
  std::string output;
  bool quiet = false;

  void write_json(const json& j) const {
    std::string text = j.dump(2) + "\n";
    if (output.empty())
      std::cout << text;
    else
      write_file(output, text);
  }

  // Summary stream: stdout when the JSON went to a file, stderr when the
  // JSON went to stdout, a closed (swallowing) stream under --quiet.
  std::ostream& note() const {
    static std::ofstream swallow;
    if (quiet) return swallow;
    return output.empty() ? std::cerr : std::cout;
  }
};

template <typename T>
T take_random(std::vector<T>& pool, std::mt19937_64& rng) {
  size_t k = static_cast<size_t>(rng() % pool.size());
  T out = pool[k];
  pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
  return out;
}

clue::circuit_role parse_role(const std::string& s) {
  if (s == "forget") return clue::circuit_role::forget;
  if (s == "retain") return clue::circuit_role::retain;
  return clue::circuit_role::untagged;
}

// Loads a circuit that must play the given role. Untagged files are adopted
// into the role; a file tagged with the opposite role is rejected rather
// than silently relabeled.
clue::logical_circuit load_role_circuit(const std::string& text, const std::string& path,
                                        clue::circuit_role want) {
  auto c = clue::parse_circuit(text);
  if (c.role == clue::circuit_role::untagged) {
    c.role = want;
    return c;
  }
  if (c.role != want)
    clue::fail(errc::role_mismatch,
               path + " is tagged " + clue::circuit_role_name(c.role) + " but was passed as the " +
                   clue::circuit_role_name(want) + " circuit");
  return c;
}

// ---------------------------------------------------------------------------
// gen

struct gen_args {
  int sources = 5;
  int max_fan = 3;
  double p_and = 0.5;
  std::string shape = "tree";
  std::string out_gate = "auto";
  std::string role = "none";
};

// Builds the network bottom-up: repeatedly collapse 2..max_fan pending roots
// into a fresh gate until one root remains; that last gate is the output.
// Interior gates are AND/OR only (an interior multi-input ADDER is
// observationally an OR at the output, and fan-in-1 gates are degenerate),
// the output may be any kind. The dag shape occasionally feeds an
// already-consumed node into a new gate, giving some nodes fan-out > 1.
clue::logical_circuit generate_network(const gen_args& a, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<clue::neuron_id> nodes;
  std::vector<clue::circuit_edge> edges;
  std::map<clue::neuron_id, clue::gate_kind> gates;

  std::vector<clue::neuron_id> ready;
  for (int i = 1; i <= a.sources; ++i) {
    clue::neuron_id s{"s" + std::to_string(i)};
    nodes.push_back(s);
    ready.push_back(s);
  }

  std::vector<clue::neuron_id> consumed;
  int gate_no = 0;
  while (ready.size() > 1) {
    size_t cap = std::min<size_t>(static_cast<size_t>(a.max_fan), ready.size());
    size_t fan = 2 + rng() % (cap - 1);  // cap >= 2: fan-in 2..cap, never 1
    std::vector<clue::neuron_id> senders;
    for (size_t i = 0; i < fan; ++i) senders.push_back(take_random(ready, rng));
    if (a.shape == "dag" && !consumed.empty() && senders.size() < static_cast<size_t>(a.max_fan) &&
        (rng() & 1)) {
      const auto& extra = consumed[rng() % consumed.size()];
      if (std::find(senders.begin(), senders.end(), extra) == senders.end())
        senders.push_back(extra);
    }

    bool is_output = ready.empty();
    clue::gate_kind kind;
    if (!is_output) {
      kind = (rng() % 1000000) < static_cast<std::uint64_t>(a.p_and * 1000000)
                 ? clue::gate_kind::AND
                 : clue::gate_kind::OR;
    } else if (a.out_gate == "and") {
      kind = clue::gate_kind::AND;
    } else if (a.out_gate == "or") {
      kind = clue::gate_kind::OR;
    } else if (a.out_gate == "adder") {
      kind = clue::gate_kind::ADDER;
    } else {
      clue::gate_kind pick[] = {clue::gate_kind::AND, clue::gate_kind::OR, clue::gate_kind::ADDER};
      kind = pick[rng() % 3];
    }

    clue::neuron_id g{"g" + std::to_string(++gate_no)};
    nodes.push_back(g);
    gates[g] = kind;
    for (const auto& s : senders) {
      edges.push_back({s, g});
      consumed.push_back(s);
    }
    ready.push_back(g);
  }

  return clue::build_circuit(std::move(nodes), std::move(edges), std::move(gates), ready.front(),
                             parse_role(a.role));
}

void run_gen(const run_options& opt, const gen_args& a) {
  auto c = generate_network(a, opt.seed);
  json out;
  out["provenance"] = clue::provenance_block({}, opt.seed);
  json cj = clue::circuit_to_json(c);
  for (auto& [k, v] : cj.items()) out[k] = std::move(v);
  opt.write_json(out);
  opt.note() << "generated " << c.sources().size() << " sources, " << c.gates.size()
             << " gates, " << c.edges.size() << " edges; output " << c.output.name << " is "
             << clue::gate_kind_name(c.gates.at(c.output)) << "\n";
}

// ---------------------------------------------------------------------------
// discover

struct discover_args {
  std::string network;
  std::string mode = "both";
  double threshold = 0.05;
  double sparsity = 0.0;
};

json effect_rows_json(const std::vector<clue::edge_effect>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json row;
    row["sender"] = r.edge.first.name;
    row["receiver"] = r.edge.second.name;
    row["valid"] = r.valid;
    row["hits"] = r.hits;
    row["rate"] = r.rate;
    row["kept"] = r.kept;
    arr.push_back(std::move(row));
  }
  return arr;
}

std::set<clue::circuit_edge> kept_edges(const std::vector<clue::edge_effect>& rows) {
  std::set<clue::circuit_edge> kept;
  for (const auto& r : rows)
    if (r.kept) kept.insert(r.edge);
  return kept;
}

void run_discover(const run_options& opt, const discover_args& a) {
  std::string text = read_file(a.network);
  clue::gate_network net(clue::parse_circuit(text));

  clue::discovery_config cfg;
  cfg.effect_threshold = a.threshold;
  cfg.sparsity_s = a.sparsity;
  cfg.seed = opt.seed;
  cfg.input_samples = clue::default_samples(net, opt.seed);

  json out;
  out["provenance"] = clue::provenance_block({{"network", text}}, opt.seed);
  out["mode"] = a.mode == "ns"   ? clue::intervention_mode_name(clue::intervention_mode::noising)
                : a.mode == "dn" ? clue::intervention_mode_name(clue::intervention_mode::denoising)
                                 : clue::intervention_mode_name(clue::intervention_mode::ns_plus_dn);
  out["effect_threshold"] = a.threshold;
  out["sparsity_s"] = a.sparsity;
  out["samples"] = cfg.input_samples.size();

  std::vector<clue::edge_effect> rows_ns, rows_dn;
  if (a.mode != "dn") {
    rows_ns = clue::sweep_edges(net, cfg, clue::intervention_mode::noising);
    out["noising"] = effect_rows_json(rows_ns);
  }
  if (a.mode != "ns") {
    rows_dn = clue::sweep_edges(net, cfg, clue::intervention_mode::denoising);
    out["denoising"] = effect_rows_json(rows_dn);
  }

  if (a.mode == "both") {
    auto c_ns = kept_edges(rows_ns);
    auto c_dn = kept_edges(rows_dn);
    auto kinds = clue::classify_gates(c_ns, c_dn);
    std::set<clue::circuit_edge> all = c_ns;
    all.insert(c_dn.begin(), c_dn.end());
    std::set<clue::neuron_id> node_set;
    for (const auto& e : all) {
      node_set.insert(e.first);
      node_set.insert(e.second);
    }
    node_set.insert(net.output());
    auto circuit = clue::build_circuit({node_set.begin(), node_set.end()},
                                       {all.begin(), all.end()}, std::move(kinds), net.output(),
                                       clue::circuit_role::untagged);
    out["circuit"] = clue::circuit_to_json(circuit);
    opt.write_json(out);
    opt.note() << "kept " << c_ns.size() << " noising / " << c_dn.size()
               << " denoising edges; recovered " << circuit.gates.size() << " gates over "
               << circuit.nodes.size() << " nodes\n";
    return;
  }

  opt.write_json(out);
  const auto& rows = a.mode == "ns" ? rows_ns : rows_dn;
  opt.note() << "kept " << kept_edges(rows).size() << " of " << rows.size() << " edges ("
             << out["mode"].get<std::string>()
             << " only; run with --mode both to classify gates)\n";
}

// ---------------------------------------------------------------------------
// to-cnf

struct tocnf_args {
  std::string circuit;
  std::string forget;
  std::string retain;
  std::string sidecar;
};

void run_to_cnf(const run_options& opt, const tocnf_args& a) {
  if (a.circuit.empty() && a.forget.empty())
    throw CLI::RequiredError("--circuit or --forget/--retain");

  clue::var_allocator alloc;
  clue::cnf_formula f;
  if (!a.circuit.empty()) {
    auto c = clue::parse_circuit(read_file(a.circuit));
    f = clue::circuit_to_cnf(c, alloc);
  } else {
    auto cf = load_role_circuit(read_file(a.forget), a.forget, clue::circuit_role::forget);
    auto cr = load_role_circuit(read_file(a.retain), a.retain, clue::circuit_role::retain);
    auto phi_f = clue::circuit_to_cnf(cf, alloc);
    auto phi_r = clue::circuit_to_cnf(cr, alloc);
    f = clue::compose_phi(phi_f, phi_r);
  }

  std::string dim = clue::dimacs::write_string(f);
  if (opt.output.empty())
    std::cout << dim;
  else
    write_file(opt.output, dim);

  std::string sidecar_path = a.sidecar;
  if (sidecar_path.empty() && !opt.output.empty()) sidecar_path = opt.output + ".vars.json";
  if (!sidecar_path.empty())
    write_file(sidecar_path, clue::dimacs::sidecar_json(f).dump(2) + "\n");

  opt.note() << f.var_count << " variables, " << f.clauses.size() << " clauses"
             << (f.adders_simplified ? " (adders simplified)" : "")
             << (sidecar_path.empty() ? "" : "; variable names in " + sidecar_path) << "\n";
}

// ---------------------------------------------------------------------------
// solve

struct solve_args {
  std::string dimacs;
  std::string sidecar;
  std::vector<long long> assume;
};

void run_solve(const run_options& opt, const solve_args& a) {
  std::string text = read_file(a.dimacs);
  auto f = clue::dimacs::read_string(text);
  std::map<std::string, std::string> inputs{{"dimacs", text}};
  if (!a.sidecar.empty()) {
    std::string sc = read_file(a.sidecar);
    clue::dimacs::apply_sidecar(f, parse_json_text(sc, a.sidecar));
    inputs["sidecar"] = sc;
  }

  std::vector<clue::literal> assumptions;
  for (long long v : a.assume) {
    if (v == 0) clue::fail(errc::invalid_config, "assumption literal may not be 0");
    assumptions.push_back({static_cast<int>(v < 0 ? -v : v), v < 0});
  }

  clue::sat_solver solver(f, opt.seed);
  auto res = assumptions.empty() ? solver.solve() : solver.solve_under_assumptions(assumptions);

  json out;
  out["provenance"] = clue::provenance_block(inputs, opt.seed);
  json rj = clue::solve_result_to_json(res);
  for (auto& [k, v] : rj.items()) out[k] = std::move(v);
  if (res.satisfiable && !f.names.empty()) {
    json named = json::object();
    for (int v = 1; v <= f.var_count; ++v) {
      if (static_cast<size_t>(v) <= f.names.size() && !f.names[v - 1].empty())
        named[f.names[v - 1]] = res.model.value(v);
    }
    out["assignment"] = std::move(named);
  }
  opt.write_json(out);

  if (res.satisfiable)
    opt.note() << "SAT";
  else
    opt.note() << "UNSAT (core size " << res.core.size() << ")";
  opt.note() << " after " << res.stats.conflicts << " conflicts, " << res.stats.decisions
             << " decisions, " << res.stats.propagations << " propagations\n";
}

// ---------------------------------------------------------------------------
// localize

struct localize_args {
  std::string forget;
  std::string retain;
};

void run_localize(const run_options& opt, const localize_args& a) {
  std::string tf = read_file(a.forget);
  std::string tr = read_file(a.retain);
  auto cf = load_role_circuit(tf, a.forget, clue::circuit_role::forget);
  auto cr = load_role_circuit(tr, a.retain, clue::circuit_role::retain);
  auto rep = clue::localize(cf, cr, opt.seed);

  json out;
  out["provenance"] = clue::provenance_block({{"forget", tf}, {"retain", tr}}, opt.seed);
  json rj = clue::report_to_json(rep);
  for (auto& [k, v] : rj.items()) out[k] = std::move(v);
  opt.write_json(out);

  std::map<clue::neuron_class, int> counts;
  for (const auto& [n, cls] : rep.classes) ++counts[cls];
  opt.note() << rep.classes.size() << " neurons: " << counts[clue::neuron_class::forget]
             << " forget, " << counts[clue::neuron_class::safe_retain] << " safe_retain, "
             << counts[clue::neuron_class::conflict] << " conflict, "
             << counts[clue::neuron_class::safe_absent] << " safe_absent"
             << "; minimal conflict set has " << rep.conflict_count << " neuron(s)\n";
}

// ---------------------------------------------------------------------------
// emit

struct emit_args {
  std::string report;
  std::string layout;
  clue::schedule_config cfg;
};

void run_emit(const run_options& opt, const emit_args& a) {
  std::string rt = read_file(a.report);
  std::string lt = read_file(a.layout);
  auto rep = clue::report_from_json(parse_json_text(rt, a.report));
  auto layout = clue::layout_from_json(parse_json_text(lt, a.layout));
  auto masks = clue::emit_masks(rep, layout);
  auto sched = clue::emit_schedule(masks, a.cfg);

  json out;
  out["provenance"] = clue::provenance_block({{"layout", lt}, {"report", rt}}, opt.seed);
  out["forget_mask"] = clue::mask_to_json(masks.first);
  out["conflict_mask"] = clue::mask_to_json(masks.second);
  out["schedule"] = clue::schedule_to_json(sched);
  opt.write_json(out);

  opt.note() << "forget mask covers " << masks.first.index_count() << " indices, conflict mask "
             << masks.second.index_count() << "; schedule runs "
             << sched.stages[0].epochs << "+" << sched.stages[1].epochs << " epochs\n";
}

// ---------------------------------------------------------------------------
// verify

struct verify_args {
  std::string forget;
  std::string retain;
  int random_pairs = 0;
  int threads = 1;
};

struct pair_outcome {
  bool ok = true;
  std::string detail;
  clue::localization_report rep;
};

std::vector<std::string> conflict_set(const clue::localization_report& r) {
  std::vector<std::string> v;
  for (const auto& [n, cls] : r.classes)
    if (cls == clue::neuron_class::conflict) v.push_back(n.name);
  return v;  // map iteration order is already lexicographic
}

pair_outcome check_pair(const clue::logical_circuit& cf, const clue::logical_circuit& cr,
                        std::uint64_t seed) {
  pair_outcome out;
  out.rep = clue::localize(cf, cr, seed);
  auto oracle = clue::brute_force_localize(cf, cr);
  if (out.rep.conflict_count != oracle.conflict_count) {
    out.ok = false;
    out.detail = "conflict_count " + std::to_string(out.rep.conflict_count) + " but oracle found " +
                 std::to_string(oracle.conflict_count);
    return out;
  }
  if (conflict_set(out.rep) != conflict_set(oracle)) {
    out.ok = false;
    out.detail = "conflict sets differ under the lexicographic tie-break";
    return out;
  }
  if (!clue::report_is_sound(out.rep, cf, cr)) {
    out.ok = false;
    out.detail = "report classes do not satisfy the circuit equations";
    return out;
  }
  if (!clue::report_is_sound(oracle, cf, cr)) {
    out.ok = false;
    out.detail = "oracle report classes do not satisfy the circuit equations";
  }
  return out;
}

// Small forget/retain pairs over shared name pools, so the two sides overlap
// on sources and may define the same interior gate differently. Outputs get
// side-specific names; every gate pulls 2..3 distinct earlier nodes.
std::pair<clue::logical_circuit, clue::logical_circuit> random_pair(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<std::string> source_pool = {"x1", "x2", "x3", "x4"};

  auto gen_side = [&](clue::circuit_role role, const std::string& out_name) {
    std::vector<clue::neuron_id> nodes;
    std::vector<clue::circuit_edge> edges;
    std::map<clue::neuron_id, clue::gate_kind> gates;

    std::vector<std::string> pool = source_pool;
    int nsrc = 2 + static_cast<int>(rng() % 3);
    for (int i = 0; i < nsrc; ++i) nodes.push_back({take_random(pool, rng)});

    auto add_gate = [&](const clue::neuron_id& g) {
      size_t fan = std::min<size_t>(2 + rng() % 2, nodes.size());
      std::vector<clue::neuron_id> cand = nodes;
      clue::gate_kind pick[] = {clue::gate_kind::AND, clue::gate_kind::OR,
                                clue::gate_kind::ADDER};
      gates[g] = pick[rng() % 3];
      for (size_t i = 0; i < fan; ++i) edges.push_back({take_random(cand, rng), g});
      nodes.push_back(g);
    };

    int ngate = static_cast<int>(rng() % 3);
    for (int gi = 0; gi < ngate; ++gi) add_gate({"h" + std::to_string(gi + 1)});
    clue::neuron_id out{out_name};
    add_gate(out);
    return clue::build_circuit(std::move(nodes), std::move(edges), std::move(gates), out, role);
  };

  auto f = gen_side(clue::circuit_role::forget, "fo");
  auto r = gen_side(clue::circuit_role::retain, "ro");
  return {std::move(f), std::move(r)};
}

std::uint64_t pair_seed(std::uint64_t seed, int index) {
  return seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(index + 1));
}

bool run_verify(const run_options& opt, const verify_args& a) {
  json out;
  std::vector<pair_outcome> results;

  if (a.random_pairs > 0) {
    out["provenance"] = clue::provenance_block({}, opt.seed);
    out["mode"] = "random";
    out["pairs"] = a.random_pairs;
    results.resize(static_cast<size_t>(a.random_pairs));

    int threads = std::min(a.threads, a.random_pairs);
    auto worker = [&](int t) {
      for (int i = t; i < a.random_pairs; i += threads) {
        try {
          auto [cf, cr] = random_pair(pair_seed(opt.seed, i));
          results[static_cast<size_t>(i)] = check_pair(cf, cr, opt.seed);
        } catch (const std::exception& e) {
          results[static_cast<size_t>(i)].ok = false;
          results[static_cast<size_t>(i)].detail = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker, t);
    worker(0);
    for (auto& th : pool) th.join();
  } else {
    if (a.forget.empty() || a.retain.empty())
      throw CLI::RequiredError("--forget/--retain or --random");
    std::string tf = read_file(a.forget);
    std::string tr = read_file(a.retain);
    auto cf = load_role_circuit(tf, a.forget, clue::circuit_role::forget);
    auto cr = load_role_circuit(tr, a.retain, clue::circuit_role::retain);
    out["provenance"] = clue::provenance_block({{"forget", tf}, {"retain", tr}}, opt.seed);
    out["mode"] = "pair";
    out["pairs"] = 1;
    results.push_back(check_pair(cf, cr, opt.seed));
    out["report"] = clue::report_to_json(results.front().rep);
  }

  json failures = json::array();
  for (size_t i = 0; i < results.size(); ++i) {
    if (results[i].ok) continue;
    json f;
    f["index"] = i;
    f["detail"] = results[i].detail;
    failures.push_back(std::move(f));
  }
  bool ok = failures.empty();
  out["failures"] = std::move(failures);
  out["ok"] = ok;
  opt.write_json(out);

  if (ok)
    opt.note() << "oracle agrees on " << results.size() << " pair(s)\n";
  else
    opt.note() << out["failures"].size() << " of " << results.size()
               << " pair(s) disagree with the oracle\n";
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conflict-guided neuron localization over planted gate networks"};
  app.require_subcommand(1);

  run_options opt;
  app.add_option("--seed", opt.seed, "seed for randomized steps (env CLUE_SEED)")
      ->envname("CLUE_SEED");
  app.add_option("--output", opt.output, "write the JSON result to this file instead of stdout");
  app.add_flag("--quiet", opt.quiet, "suppress the human summary");

  gen_args ga;
  auto* gen = app.add_subcommand("gen", "generate a planted gate network");
  gen->fallthrough();
  gen->add_option("--sources", ga.sources, "number of source nodes")->check(CLI::Range(2, 4096));
  gen->add_option("--max-fan-in", ga.max_fan, "largest gate fan-in")->check(CLI::Range(2, 64));
  gen->add_option("--p-and", ga.p_and, "probability an interior gate is AND rather than OR")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--shape", ga.shape, "tree keeps fan-out 1, dag reuses nodes")
      ->check(CLI::IsMember({"tree", "dag"}));
  gen->add_option("--out-gate", ga.out_gate, "output gate kind")
      ->check(CLI::IsMember({"and", "or", "adder", "auto"}));
  gen->add_option("--role", ga.role, "role tag recorded in the circuit")
      ->check(CLI::IsMember({"forget", "retain", "none"}));
  gen->callback([&] { run_gen(opt, ga); });

  discover_args da;
  auto* discover = app.add_subcommand("discover", "recover a circuit by intervention sweeps");
  discover->fallthrough();
  discover->add_option("--network", da.network, "planted network JSON")->required();
  discover->add_option("--mode", da.mode, "ns (noising), dn (denoising), or both")
      ->check(CLI::IsMember({"ns", "dn", "both"}));
  discover->add_option("--threshold", da.threshold, "minimum effect rate to keep an edge")
      ->check(CLI::Range(0.0, 1.0));
  discover->add_option("--sparsity", da.sparsity, "minimum fraction of edges to drop")
      ->check(CLI::Range(0.0, 1.0));
  discover->callback([&] { run_discover(opt, da); });

  tocnf_args ta;
  auto* tocnf = app.add_subcommand("to-cnf", "transform circuits to DIMACS CNF");
  tocnf->fallthrough();
  auto* t_c = tocnf->add_option("--circuit", ta.circuit, "single role-tagged circuit JSON");
  auto* t_f = tocnf->add_option("--forget", ta.forget, "forget circuit JSON (composed form)");
  auto* t_r = tocnf->add_option("--retain", ta.retain, "retain circuit JSON (composed form)");
  tocnf->add_option("--sidecar", ta.sidecar,
                    "variable-name sidecar path (default: <output>.vars.json)");
  t_c->excludes(t_f)->excludes(t_r);
  t_f->needs(t_r);
  t_r->needs(t_f);
  tocnf->callback([&] { run_to_cnf(opt, ta); });

  solve_args sa;
  auto* solve = app.add_subcommand("solve", "run the CDCL solver on a DIMACS file");
  solve->fallthrough();
  solve->add_option("--dimacs", sa.dimacs, "DIMACS CNF input")->required();
  solve->add_option("--sidecar", sa.sidecar, "variable-name sidecar JSON");
  solve->add_option("--assume", sa.assume, "assumption literals, e.g. --assume 1,-3")
      ->delimiter(',');
  solve->callback([&] { run_solve(opt, sa); });

  localize_args la;
  auto* localize = app.add_subcommand("localize", "classify neurons and find the conflict set");
  localize->fallthrough();
  localize->add_option("--forget", la.forget, "forget circuit JSON")->required();
  localize->add_option("--retain", la.retain, "retain circuit JSON")->required();
  localize->callback([&] { run_localize(opt, la); });

  emit_args ea;
  auto* emit = app.add_subcommand("emit", "emit masks and a fine-tuning schedule");
  emit->fallthrough();
  emit->add_option("--report", ea.report, "localization report JSON")->required();
  emit->add_option("--layout", ea.layout, "model layout JSON")->required();
  emit->add_option("--forget-epochs", ea.cfg.forget_epochs, "stage-one epochs");
  emit->add_option("--conflict-epochs", ea.cfg.conflict_epochs, "stage-two epochs");
  emit->add_option("--learning-rate", ea.cfg.learning_rate, "learning rate for both stages");
  emit->add_option("--lambda", ea.cfg.lambda, "retain-loss weight in stage two");
  emit->add_option("--optimizer", ea.cfg.optimizer, "optimizer name recorded in the schedule");
  emit->callback([&] { run_emit(opt, ea); });

  verify_args va;
  int verify_exit = 0;
  auto* verify = app.add_subcommand("verify", "cross-check localize against the oracle");
  verify->fallthrough();
  auto* v_f = verify->add_option("--forget", va.forget, "forget circuit JSON");
  auto* v_r = verify->add_option("--retain", va.retain, "retain circuit JSON");
  auto* v_n = verify->add_option("--random", va.random_pairs, "verify N self-generated pairs")
                  ->check(CLI::Range(1, 1000000));
  verify->add_option("--threads", va.threads, "worker threads for --random")
      ->check(CLI::Range(1, 256));
  v_f->needs(v_r);
  v_r->needs(v_f);
  v_n->excludes(v_f)->excludes(v_r);
  verify->callback([&] { verify_exit = run_verify(opt, va) ? 0 : 3; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const clue::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == errc::internal_error ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 3;
  }
  return verify_exit;
}
