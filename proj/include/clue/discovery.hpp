#pragma once

// Recovers a logical circuit from a gate network treated as a black box.
//
// The network exposes its topology and an evaluate-with-edge-ablation entry
// point but not its gate kinds. Discovery runs two intervention sweeps over a
// set of (clean, corrupt) source-assignment pairs:
//
//   noising    runs the network on the clean sources and patches one edge to
//              carry its sender's corrupt-run state
//   denoising  runs on the corrupt sources and patches one edge to carry the
//              sender's clean-run state
//
// A sample counts toward an edge only when it actually exercises the edge in
// its reference context: the sender must flip across the two runs (active in
// clean, inactive in corrupt) and the receiver's other senders must sit in
// the baseline state of the run being patched (all active for noising, all
// inactive for denoising). Within that context an AND-like receiver transmits
// a noising flip and absorbs a denoising one, while an OR-like receiver does
// the opposite, and an additive receiver transmits both. The per-edge effect
// rate is the fraction of qualifying samples whose patched output differs
// from the unpatched one, so noising keeps AND and ADDER edges, denoising
// keeps OR and ADDER edges, and set algebra over the two sweeps labels every
// receiver's gate kind.

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "clue/circuit.hpp"
#include "clue/error.hpp"

namespace clue {

enum class intervention_mode { noising, denoising, ns_plus_dn };

inline const char* intervention_mode_name(intervention_mode m) {
  switch (m) {
    case intervention_mode::noising: return "noising";
    case intervention_mode::denoising: return "denoising";
    case intervention_mode::ns_plus_dn: return "ns_plus_dn";
  }
  return "?";
}

// Which run supplies the state carried by a removed edge.
enum class edge_fill { clean_fill, corrupt_fill };

struct sample_pair {
  std::map<neuron_id, activation_state> clean;
  std::map<neuron_id, activation_state> corrupt;
};

struct discovery_config {
  double sparsity_s = 0.0;         // in [0,1): minimum fraction of edges to drop
  double effect_threshold = 0.05;  // in (0,1]: minimum effect rate to keep an edge
  std::vector<sample_pair> input_samples;
  std::uint64_t seed = 0;          // recorded in reports; used only for sampled inputs
};

// A planted network under test. Evaluation, alone or with edges patched, is
// compiled down to index arithmetic so sweeps stay cheap; the ground-truth
// gate kinds are carried only for oracle comparison and are not consulted by
// any discovery path.
class gate_network {
 public:
  explicit gate_network(logical_circuit planted) : planted_(std::move(planted)) {
    int n = static_cast<int>(planted_.nodes.size());
    kind_.assign(n, -1);
    senders_.resize(n);
    for (int i = 0; i < n; ++i) index_[planted_.nodes[i]] = i;
    for (int i = 0; i < n; ++i) {
      const auto& node = planted_.nodes[i];
      auto g = planted_.gates.find(node);
      if (g != planted_.gates.end()) kind_[i] = static_cast<int>(g->second);
      auto in = planted_.incoming.find(node);
      if (in != planted_.incoming.end())
        for (const auto& s : in->second) senders_[i].push_back(index_.at(s));
    }
    for (int i = 0; i < n; ++i)
      if (kind_[i] < 0) source_index_.push_back(i);
    for (int i : source_index_) source_names_.push_back(planted_.nodes[i]);
    output_index_ = index_.at(planted_.output);
  }

  const logical_circuit& planted() const { return planted_; }
  const std::vector<neuron_id>& nodes() const { return planted_.nodes; }
  const std::vector<neuron_id>& sources() const { return source_names_; }
  const std::vector<circuit_edge>& edges() const { return planted_.edges; }
  const neuron_id& output() const { return planted_.output; }

  std::map<neuron_id, activation_state> run(
      const std::map<neuron_id, activation_state>& source_states) const {
    return evaluate(planted_, source_states);
  }

  // Translates a source assignment into bits ordered like sources().
  std::vector<int> source_bits(
      const std::map<neuron_id, activation_state>& source_states) const {
    for (const auto& [node, state] : source_states) {
      auto it = index_.find(node);
      if (it == index_.end() || kind_[it->second] >= 0)
        fail(errc::unknown_source, "state given for non-source node '" + node.name + "'");
      if (state != 0 && state != 1)
        fail(errc::invalid_state,
             "source '" + node.name + "' must be 0 or 1, got " + std::to_string(state));
    }
    std::vector<int> bits(source_index_.size());
    for (size_t j = 0; j < source_names_.size(); ++j) {
      auto it = source_states.find(source_names_[j]);
      if (it == source_states.end())
        fail(errc::missing_source_state, "no state for source '" + source_names_[j].name + "'");
      bits[j] = it->second;
    }
    return bits;
  }

  // Full forward pass; states indexed like nodes().
  std::vector<int> eval_states(const std::vector<int>& src_bits) const {
    std::vector<int> st(kind_.size(), 0);
    for (size_t j = 0; j < source_index_.size(); ++j) st[source_index_[j]] = src_bits[j];
    for (size_t i = 0; i < kind_.size(); ++i) {
      if (kind_[i] < 0) continue;
      st[i] = gate_value(static_cast<int>(i), [&](int s) { return st[s] >= 1; });
    }
    return st;
  }

  // Forward pass on src_bits where each (sender, receiver) pair in `removed`
  // feeds the receiver the sender's state from `ref_states` instead. The
  // patch is per edge: the sender's own state and its other uses are intact.
  std::vector<int> patched_states(const std::vector<std::pair<int, int>>& removed,
                                  const std::vector<int>& src_bits,
                                  const std::vector<int>& ref_states) const {
    std::vector<int> st(kind_.size(), 0);
    for (size_t j = 0; j < source_index_.size(); ++j) st[source_index_[j]] = src_bits[j];
    for (size_t i = 0; i < kind_.size(); ++i) {
      if (kind_[i] < 0) continue;
      st[i] = gate_value(static_cast<int>(i), [&](int s) {
        for (const auto& [rs, rr] : removed)
          if (rr == static_cast<int>(i) && rs == s) return ref_states[s] >= 1;
        return st[s] >= 1;
      });
    }
    return st;
  }

  int output_index() const { return output_index_; }
  int node_index(const neuron_id& n) const { return index_.at(n); }
  const std::vector<int>& senders_of_index(int i) const { return senders_[i]; }

  // Contract-shaped entry point: evaluates with main-run sources and patches
  // every removed edge with its sender's state under the reference sources.
  activation_state ablated_output(const std::set<circuit_edge>& removed,
                                  const std::map<neuron_id, activation_state>& main_sources,
                                  const std::map<neuron_id, activation_state>& reference_sources) const {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(removed.size());
    for (const auto& e : removed) {
      if (!std::binary_search(planted_.edges.begin(), planted_.edges.end(), e))
        fail(errc::unknown_edge,
             "no edge " + e.first.name + " -> " + e.second.name + " in the network");
      pairs.emplace_back(index_.at(e.first), index_.at(e.second));
    }
    auto ref = eval_states(source_bits(reference_sources));
    auto st = patched_states(pairs, source_bits(main_sources), ref);
    return st[output_index_];
  }

 private:
  template <typename SenderBit>
  int gate_value(int i, SenderBit bit) const {
    const auto& in = senders_[i];
    switch (static_cast<gate_kind>(kind_[i])) {
      case gate_kind::AND: {
        for (int s : in)
          if (!bit(s)) return 0;
        return 1;
      }
      case gate_kind::OR: {
        for (int s : in)
          if (bit(s)) return 1;
        return 0;
      }
      case gate_kind::ADDER: {
        int sum = 0;
        for (int s : in) sum += bit(s) ? 1 : 0;
        return sum;
      }
    }
    fail(errc::internal_error, "unhandled gate kind");
  }

  logical_circuit planted_;
  std::map<neuron_id, int> index_;
  std::vector<int> kind_;  // gate kind per node, -1 for sources
  std::vector<std::vector<int>> senders_;
  std::vector<int> source_index_;
  std::vector<neuron_id> source_names_;
  int output_index_ = 0;
};

// Evaluates the network with the removed edges filled from the corrupt run
// (main run = clean sources) or from the clean run (main run = corrupt).
inline activation_state ablate_evaluate(const gate_network& net,
                                        const std::set<circuit_edge>& removed,
                                        const std::map<neuron_id, activation_state>& clean_sources,
                                        const std::map<neuron_id, activation_state>& corrupt_sources,
                                        edge_fill fill) {
  if (fill == edge_fill::corrupt_fill)
    return net.ablated_output(removed, clean_sources, corrupt_sources);
  return net.ablated_output(removed, corrupt_sources, clean_sources);
}

// Default sample set: exhaustive clean patterns with complemented corrupt
// partners when the source count permits, otherwise 256 seeded random pairs
// (corrupt = clean with a nonempty source subset flipped).
inline std::vector<sample_pair> default_samples(const gate_network& net, std::uint64_t seed) {
  const auto& srcs = net.sources();
  size_t k = srcs.size();
  std::vector<sample_pair> out;
  if (k == 0) return out;
  if (k <= 12) {
    out.reserve(size_t{1} << k);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
      sample_pair p;
      for (size_t j = 0; j < k; ++j) {
        int bit = (mask >> j) & 1;
        p.clean[srcs[j]] = bit;
        p.corrupt[srcs[j]] = 1 - bit;
      }
      out.push_back(std::move(p));
    }
    return out;
  }
  std::mt19937_64 rng(seed);
  out.reserve(256);
  for (int i = 0; i < 256; ++i) {
    sample_pair p;
    std::vector<int> flip(k, 0);
    bool any = false;
    while (!any)
      for (size_t j = 0; j < k; ++j) any |= (flip[j] = static_cast<int>(rng() & 1));
    for (size_t j = 0; j < k; ++j) {
      int bit = static_cast<int>(rng() & 1);
      p.clean[srcs[j]] = bit;
      p.corrupt[srcs[j]] = flip[j] ? 1 - bit : bit;
    }
    out.push_back(std::move(p));
  }
  return out;
}

struct edge_effect {
  circuit_edge edge;
  std::uint64_t valid = 0;  // samples exercising the edge in context
  std::uint64_t hits = 0;   // of those, samples where the output moved
  double rate = 0.0;        // hits / valid (0 when nothing qualified)
  bool kept = false;
};

namespace detail {

inline void validate_discovery_config(const gate_network& net, const discovery_config& cfg) {
  if (cfg.input_samples.empty())
    fail(errc::empty_sample_set, "discovery needs at least one (clean, corrupt) sample pair");
  if (!(cfg.effect_threshold > 0.0 && cfg.effect_threshold <= 1.0))
    fail(errc::invalid_config, "effect_threshold must lie in (0,1]");
  if (!(cfg.sparsity_s >= 0.0 && cfg.sparsity_s < 1.0))
    fail(errc::invalid_config, "sparsity_s must lie in [0,1)");
  for (const auto& p : cfg.input_samples) {
    auto c = net.source_bits(p.clean);
    auto d = net.source_bits(p.corrupt);
    if (c == d)
      fail(errc::invalid_config, "clean and corrupt sources must differ somewhere");
  }
}

}  // namespace detail

// Measures every network edge under one intervention mode. Edges are visited
// receiver-major in reverse topological order (output end first), senders in
// name order, and the result rows follow that sweep order. After the
// threshold cut, if the kept fraction still violates the sparsity floor the
// lowest-rate kept edges are dropped first (ties: smaller (sender, receiver)
// name pair goes first).
inline std::vector<edge_effect> sweep_edges(const gate_network& net,
                                            const discovery_config& cfg,
                                            intervention_mode mode) {
  if (mode == intervention_mode::ns_plus_dn)
    fail(errc::invalid_config, "sweep_edges takes a single intervention mode");
  detail::validate_discovery_config(net, cfg);
  bool noising = mode == intervention_mode::noising;

  size_t samples = cfg.input_samples.size();
  std::vector<std::vector<int>> clean_src(samples), corrupt_src(samples);
  std::vector<std::vector<int>> clean_st(samples), corrupt_st(samples);
  for (size_t i = 0; i < samples; ++i) {
    clean_src[i] = net.source_bits(cfg.input_samples[i].clean);
    corrupt_src[i] = net.source_bits(cfg.input_samples[i].corrupt);
    clean_st[i] = net.eval_states(clean_src[i]);
    corrupt_st[i] = net.eval_states(corrupt_src[i]);
  }

  int out_idx = net.output_index();
  std::vector<edge_effect> rows;
  rows.reserve(net.edges().size());
  const auto& node_order = net.nodes();
  for (int r = static_cast<int>(node_order.size()) - 1; r >= 0; --r) {
    const auto& senders = net.senders_of_index(r);
    for (int s : senders) {
      edge_effect row;
      row.edge = {node_order[s], node_order[r]};
      for (size_t i = 0; i < samples; ++i) {
        // the sender must flip across the runs
        if (clean_st[i][s] < 1 || corrupt_st[i][s] >= 1) continue;
        // the receiver's other senders must sit at the mode's baseline
        bool context = true;
        for (int t : senders) {
          if (t == s) continue;
          bool active = (noising ? clean_st[i] : corrupt_st[i])[t] >= 1;
          if (active != noising) { context = false; break; }
        }
        if (!context) continue;
        ++row.valid;
        const auto& main_src = noising ? clean_src[i] : corrupt_src[i];
        const auto& main_st = noising ? clean_st[i] : corrupt_st[i];
        const auto& ref_st = noising ? corrupt_st[i] : clean_st[i];
        auto patched = net.patched_states({{s, r}}, main_src, ref_st);
        if (patched[out_idx] != main_st[out_idx]) ++row.hits;
      }
      row.rate = row.valid ? static_cast<double>(row.hits) / static_cast<double>(row.valid) : 0.0;
      row.kept = row.rate >= cfg.effect_threshold;
      rows.push_back(std::move(row));
    }
  }

  // sparsity floor: drop low-effect edges until enough of the graph is gone
  size_t total = net.edges().size();
  if (total > 0) {
    auto kept_count = [&rows] {
      size_t n = 0;
      for (const auto& r : rows) n += r.kept ? 1 : 0;
      return n;
    };
    size_t kept = kept_count();
    while (kept > 0 &&
           1.0 - static_cast<double>(kept) / static_cast<double>(total) < cfg.sparsity_s) {
      edge_effect* victim = nullptr;
      for (auto& r : rows) {
        if (!r.kept) continue;
        if (!victim || r.rate < victim->rate ||
            (r.rate == victim->rate && r.edge < victim->edge))
          victim = &r;
      }
      victim->kept = false;
      --kept;
    }
  }
  return rows;
}

inline std::set<circuit_edge> discover_edges(const gate_network& net,
                                             const discovery_config& cfg,
                                             intervention_mode mode) {
  std::set<circuit_edge> kept;
  for (const auto& row : sweep_edges(net, cfg, mode))
    if (row.kept) kept.insert(row.edge);
  return kept;
}

// Votes a gate kind per receiver from the two recovered edge sets: an edge
// seen only by noising marks its receiver AND, only by denoising marks OR,
// and by both marks ADDER. Receivers whose recovered edges disagree are an
// error rather than a silent majority pick.
inline std::map<neuron_id, gate_kind> classify_gates(const std::set<circuit_edge>& c_ns,
                                                     const std::set<circuit_edge>& c_dn) {
  std::map<neuron_id, std::set<gate_kind>> votes;
  auto vote = [&](const circuit_edge& e) {
    bool in_ns = c_ns.count(e) > 0;
    bool in_dn = c_dn.count(e) > 0;
    gate_kind k = in_ns && in_dn ? gate_kind::ADDER
                 : in_ns         ? gate_kind::AND
                                 : gate_kind::OR;
    votes[e.second].insert(k);
  };
  for (const auto& e : c_ns) vote(e);
  for (const auto& e : c_dn) vote(e);

  std::map<neuron_id, gate_kind> kinds;
  for (const auto& [node, ks] : votes) {
    if (ks.size() != 1)
      fail(errc::mixed_evidence,
           "incoming edges of '" + node.name + "' disagree on its gate kind");
    kinds[node] = *ks.begin();
  }
  return kinds;
}

// The combined Ns+Dn pipeline: both sweeps, edge union, gate classification,
// and a validated untagged circuit whose output is the network's output.
inline logical_circuit discover_logical_circuit(const gate_network& net,
                                                const discovery_config& cfg) {
  auto ns = discover_edges(net, cfg, intervention_mode::noising);
  auto dn = discover_edges(net, cfg, intervention_mode::denoising);
  std::set<circuit_edge> all(ns.begin(), ns.end());
  all.insert(dn.begin(), dn.end());
  auto kinds = classify_gates(ns, dn);

  std::set<neuron_id> node_set;
  for (const auto& e : all) {
    node_set.insert(e.first);
    node_set.insert(e.second);
  }
  node_set.insert(net.output());
  std::vector<neuron_id> nodes(node_set.begin(), node_set.end());
  std::vector<circuit_edge> edges(all.begin(), all.end());
  return build_circuit(nodes, edges, kinds, net.output(), circuit_role::untagged);
}

}  // namespace clue
