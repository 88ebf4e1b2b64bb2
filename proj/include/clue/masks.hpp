#pragma once

// Turns a localization report into sparse parameter masks and a declarative
// two-stage fine-tuning schedule.
//
// A model layout names parameter groups (each with a shape) and maps every
// neuron to flat indices inside one group. The forget mask M_f collects the
// indices of forget neurons, the conflict mask M_c those of conflict
// neurons; safe neurons contribute nothing and the two masks must come out
// disjoint. The schedule is data only: stage one trains M_f under the forget
// loss alone, stage two trains M_c under forget plus lambda-weighted retain
// loss. Nothing here computes gradients.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "clue/circuit.hpp"
#include "clue/error.hpp"
#include "clue/localization.hpp"

namespace clue {

struct parameter_group {
  std::string name;
  std::vector<int> shape;  // flat capacity is the product
};

struct model_layout {
  std::vector<parameter_group> groups;  // ordered; names unique
  std::map<neuron_id, std::pair<std::string, std::vector<int>>> neuron_to_indices;
};

struct mask_spec {
  // group name -> sorted flat indices where the mask is 1
  std::map<std::string, std::vector<int>> groups;

  bool operator==(const mask_spec&) const = default;

  size_t index_count() const {
    size_t n = 0;
    for (const auto& [name, idxs] : groups) n += idxs.size();
    return n;
  }
};

struct schedule_stage {
  std::string mask;    // "M_f" or "M_c"
  int epochs = 0;
  std::string losses;  // "forget_only" or "forget_plus_retain"
  double lambda = 0.0;
  double learning_rate = 0.0;
  std::string optimizer;

  bool operator==(const schedule_stage&) const = default;
};

struct schedule_spec {
  std::vector<schedule_stage> stages;
  std::vector<std::string> flags;  // e.g. stage two degenerating to forget-only

  bool operator==(const schedule_spec&) const = default;
};

struct schedule_config {
  int forget_epochs = 1;
  int conflict_epochs = 5;
  double learning_rate = 1e-5;
  double lambda = 1.0;
  std::string optimizer = "AdamW";
  // fixed contract: the forget stage precedes the conflict stage
  std::vector<std::string> stage_order = {"forget", "conflict"};
};

namespace detail {

inline long long group_capacity(const parameter_group& g) {
  long long cap = 1;
  for (int d : g.shape) {
    if (d < 1) fail(errc::invalid_config, "group '" + g.name + "' has a non-positive dimension");
    cap *= d;
  }
  return cap;
}

}  // namespace detail

inline std::pair<mask_spec, mask_spec> emit_masks(const localization_report& report,
                                                  const model_layout& layout) {
  std::map<std::string, long long> capacity;
  for (const auto& g : layout.groups)
    if (!capacity.emplace(g.name, detail::group_capacity(g)).second)
      fail(errc::invalid_config, "duplicate parameter group '" + g.name + "'");

  mask_spec m_f, m_c;
  for (const auto& [n, cls] : report.classes) {
    if (cls != neuron_class::forget && cls != neuron_class::conflict) continue;
    auto it = layout.neuron_to_indices.find(n);
    if (it == layout.neuron_to_indices.end())
      fail(errc::unmapped_neuron, "neuron '" + n.name + "' has no layout mapping");
    const auto& [group, indices] = it->second;
    auto cap = capacity.find(group);
    if (cap == capacity.end())
      fail(errc::invalid_config, "neuron '" + n.name + "' maps to unknown group '" + group + "'");
    for (int idx : indices)
      if (idx < 0 || idx >= cap->second)
        fail(errc::index_out_of_bounds, "index " + std::to_string(idx) + " outside group '" +
                                            group + "' of capacity " +
                                            std::to_string(cap->second));
    auto& target = cls == neuron_class::forget ? m_f : m_c;
    auto& list = target.groups[group];
    list.insert(list.end(), indices.begin(), indices.end());
  }

  for (auto* m : {&m_f, &m_c})
    for (auto& [name, idxs] : m->groups) {
      std::sort(idxs.begin(), idxs.end());
      idxs.erase(std::unique(idxs.begin(), idxs.end()), idxs.end());
    }

  for (const auto& [name, f_idxs] : m_f.groups) {
    auto it = m_c.groups.find(name);
    if (it == m_c.groups.end()) continue;
    std::vector<int> both;
    std::set_intersection(f_idxs.begin(), f_idxs.end(), it->second.begin(), it->second.end(),
                          std::back_inserter(both));
    if (!both.empty())
      fail(errc::invalid_config, "forget and conflict masks overlap in group '" + name +
                                     "' at index " + std::to_string(both.front()));
  }
  return {std::move(m_f), std::move(m_c)};
}

inline schedule_spec emit_schedule(const std::pair<mask_spec, mask_spec>& masks,
                                   const schedule_config& config) {
  (void)masks;  // referenced by name only; emptiness is legitimate
  if (config.stage_order != std::vector<std::string>{"forget", "conflict"})
    fail(errc::invalid_config, "stage order is fixed: forget first, then conflict");
  if (config.forget_epochs < 1 || config.conflict_epochs < 1)
    fail(errc::invalid_config, "every stage needs at least one epoch");
  if (!(config.learning_rate > 0.0))
    fail(errc::invalid_config, "learning_rate must be positive");
  if (config.lambda < 0.0) fail(errc::invalid_config, "lambda must be non-negative");
  if (config.optimizer.empty()) fail(errc::invalid_config, "optimizer name must be non-empty");

  schedule_spec s;
  s.stages.push_back({"M_f", config.forget_epochs, "forget_only", 0.0, config.learning_rate,
                      config.optimizer});
  s.stages.push_back({"M_c", config.conflict_epochs, "forget_plus_retain", config.lambda,
                      config.learning_rate, config.optimizer});
  if (config.lambda == 0.0) s.flags.push_back("stage_two_retain_weight_zero");
  return s;
}

// ---- JSON forms -----------------------------------------------------------

inline nlohmann::ordered_json mask_to_json(const mask_spec& m) {
  nlohmann::ordered_json j;
  j["groups"] = nlohmann::ordered_json::object();
  for (const auto& [name, idxs] : m.groups) j["groups"][name] = idxs;
  return j;
}

inline mask_spec mask_from_json(const nlohmann::ordered_json& j) {
  mask_spec m;
  try {
    const auto& groups = j.at("groups");
    for (auto it = groups.begin(); it != groups.end(); ++it) {
      std::vector<int> idxs = it.value().get<std::vector<int>>();
      std::sort(idxs.begin(), idxs.end());
      idxs.erase(std::unique(idxs.begin(), idxs.end()), idxs.end());
      m.groups[it.key()] = std::move(idxs);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(errc::parse_error, std::string("bad mask JSON: ") + e.what());
  }
  return m;
}

inline nlohmann::ordered_json schedule_to_json(const schedule_spec& s) {
  nlohmann::ordered_json j;
  j["stages"] = nlohmann::ordered_json::array();
  for (const auto& st : s.stages) {
    nlohmann::ordered_json stage;
    stage["mask"] = st.mask;
    stage["epochs"] = st.epochs;
    stage["losses"] = st.losses;
    stage["lambda"] = st.lambda;
    stage["learning_rate"] = st.learning_rate;
    stage["optimizer"] = st.optimizer;
    j["stages"].push_back(std::move(stage));
  }
  j["flags"] = s.flags;
  return j;
}

inline void validate_schedule(const schedule_spec& s) {
  if (s.stages.size() != 2) fail(errc::invalid_config, "a schedule has exactly two stages");
  const auto& one = s.stages[0];
  const auto& two = s.stages[1];
  if (one.mask != "M_f" || one.losses != "forget_only")
    fail(errc::invalid_config, "stage one must train M_f under the forget loss alone");
  if (two.mask != "M_c" || two.losses != "forget_plus_retain")
    fail(errc::invalid_config, "stage two must train M_c under forget plus retain losses");
  for (const auto& st : s.stages) {
    if (st.epochs < 1) fail(errc::invalid_config, "every stage needs at least one epoch");
    if (!(st.learning_rate > 0.0)) fail(errc::invalid_config, "learning_rate must be positive");
    if (st.lambda < 0.0) fail(errc::invalid_config, "lambda must be non-negative");
    if (st.optimizer.empty()) fail(errc::invalid_config, "optimizer name must be non-empty");
  }
}

inline schedule_spec schedule_from_json(const nlohmann::ordered_json& j) {
  schedule_spec s;
  try {
    for (const auto& stage : j.at("stages")) {
      schedule_stage st;
      st.mask = stage.at("mask").get<std::string>();
      st.epochs = stage.at("epochs").get<int>();
      st.losses = stage.at("losses").get<std::string>();
      st.lambda = stage.at("lambda").get<double>();
      st.learning_rate = stage.at("learning_rate").get<double>();
      st.optimizer = stage.at("optimizer").get<std::string>();
      s.stages.push_back(std::move(st));
    }
    if (j.contains("flags")) s.flags = j.at("flags").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(errc::parse_error, std::string("bad schedule JSON: ") + e.what());
  }
  validate_schedule(s);
  return s;
}

inline nlohmann::ordered_json layout_to_json(const model_layout& layout) {
  nlohmann::ordered_json j;
  j["groups"] = nlohmann::ordered_json::array();
  for (const auto& g : layout.groups) {
    nlohmann::ordered_json group;
    group["name"] = g.name;
    group["shape"] = g.shape;
    j["groups"].push_back(std::move(group));
  }
  j["neurons"] = nlohmann::ordered_json::object();
  for (const auto& [n, where] : layout.neuron_to_indices) {
    nlohmann::ordered_json entry;
    entry["group"] = where.first;
    entry["indices"] = where.second;
    j["neurons"][n.name] = std::move(entry);
  }
  return j;
}

inline model_layout layout_from_json(const nlohmann::ordered_json& j) {
  model_layout layout;
  try {
    for (const auto& g : j.at("groups")) {
      parameter_group group;
      group.name = g.at("name").get<std::string>();
      group.shape = g.at("shape").get<std::vector<int>>();
      layout.groups.push_back(std::move(group));
    }
    const auto& neurons = j.at("neurons");
    for (auto it = neurons.begin(); it != neurons.end(); ++it) {
      layout.neuron_to_indices[neuron_id{it.key()}] = {
          it.value().at("group").get<std::string>(),
          it.value().at("indices").get<std::vector<int>>()};
    }
  } catch (const nlohmann::json::exception& e) {
    fail(errc::parse_error, std::string("bad layout JSON: ") + e.what());
  }
  return layout;
}

}  // namespace clue
