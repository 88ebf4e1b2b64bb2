#pragma once

// JSON forms of solver results and localization reports, matching the files
// the CLI writes so every emitted artifact re-parses through these readers.

#include <string>
#include <vector>

#include <json.hpp>

#include "clue/error.hpp"
#include "clue/localization.hpp"
#include "clue/solver.hpp"

namespace clue {

inline nlohmann::ordered_json stats_to_json(const solve_stats& s) {
  nlohmann::ordered_json j;
  j["conflicts"] = s.conflicts;
  j["decisions"] = s.decisions;
  j["propagations"] = s.propagations;
  j["restarts"] = s.restarts;
  j["learned"] = s.learned;
  return j;
}

inline solve_stats stats_from_json(const nlohmann::ordered_json& j) {
  solve_stats s;
  try {
    s.conflicts = j.at("conflicts").get<std::uint64_t>();
    s.decisions = j.at("decisions").get<std::uint64_t>();
    s.propagations = j.at("propagations").get<std::uint64_t>();
    s.restarts = j.at("restarts").get<std::uint64_t>();
    s.learned = j.at("learned").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(errc::parse_error, std::string("bad stats JSON: ") + e.what());
  }
  return s;
}

// Model as signed DIMACS-style literals: v when true, -v when false.
inline nlohmann::ordered_json solve_result_to_json(const solve_result& r) {
  nlohmann::ordered_json j;
  j["status"] = r.satisfiable ? "sat" : "unsat";
  if (r.satisfiable) {
    std::vector<int> lits;
    lits.reserve(r.model.values.size());
    for (size_t v = 1; v <= r.model.values.size(); ++v)
      lits.push_back(r.model.values[v - 1] ? static_cast<int>(v) : -static_cast<int>(v));
    j["model"] = lits;
  } else {
    std::vector<int> core;
    core.reserve(r.core.size());
    for (const auto& l : r.core) core.push_back(l.negated ? -l.var : l.var);
    j["core"] = core;
  }
  j["stats"] = stats_to_json(r.stats);
  j["seed"] = r.stats.seed;
  return j;
}

inline neuron_class neuron_class_from_name(const std::string& name) {
  if (name == "safe_absent") return neuron_class::safe_absent;
  if (name == "safe_retain") return neuron_class::safe_retain;
  if (name == "forget") return neuron_class::forget;
  if (name == "conflict") return neuron_class::conflict;
  fail(errc::parse_error, "unknown neuron class '" + name + "'");
}

inline nlohmann::ordered_json report_to_json(const localization_report& rep) {
  nlohmann::ordered_json j;
  j["classes"] = nlohmann::ordered_json::object();
  for (const auto& [n, cls] : rep.classes) j["classes"][n.name] = neuron_class_name(cls);
  j["conflict_count"] = rep.conflict_count;
  j["conflict_values"] = nlohmann::ordered_json::object();
  for (const auto& [n, sv] : rep.conflict_values) {
    nlohmann::ordered_json v;
    v["forget_side"] = sv.forget_side;
    v["retain_side"] = sv.retain_side;
    j["conflict_values"][n.name] = std::move(v);
  }
  j["stats"] = stats_to_json(rep.stats);
  j["seed"] = rep.seed;
  return j;
}

inline localization_report report_from_json(const nlohmann::ordered_json& j) {
  localization_report rep;
  try {
    const auto& classes = j.at("classes");
    for (auto it = classes.begin(); it != classes.end(); ++it)
      rep.classes[neuron_id{it.key()}] = neuron_class_from_name(it.value().get<std::string>());
    rep.conflict_count = j.at("conflict_count").get<int>();
    if (j.contains("conflict_values")) {
      const auto& values = j.at("conflict_values");
      for (auto it = values.begin(); it != values.end(); ++it)
        rep.conflict_values[neuron_id{it.key()}] = {
            it.value().at("forget_side").get<int>(),
            it.value().at("retain_side").get<int>()};
    }
    if (j.contains("stats")) rep.stats = stats_from_json(j.at("stats"));
    if (j.contains("seed")) rep.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(errc::parse_error, std::string("bad report JSON: ") + e.what());
  }
  int conflicts = 0;
  for (const auto& [n, cls] : rep.classes) conflicts += cls == neuron_class::conflict ? 1 : 0;
  if (conflicts != rep.conflict_count)
    fail(errc::parse_error, "conflict_count disagrees with the classes map");
  return rep;
}

}  // namespace clue
