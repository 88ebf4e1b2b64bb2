#pragma once

// Conflict-driven clause-learning SAT solver over cnf_formula.
//
// The usual machinery: two-watched-literal propagation, first-UIP conflict
// analysis with learned-clause minimization, activity-ordered decisions with
// phase saving (default polarity false), non-chronological backjumping,
// geometric restarts (base 100 conflicts, factor 1.5), and an activity-based
// learned-clause reduction pass. Assumption solving reports a failed-
// assumption core. Everything is deterministic: ties in the decision order
// break on variable index and no randomness is used anywhere.
//
// Every satisfying assignment is re-checked against the original clauses
// before it is returned; a failure there is a solver bug and throws.

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <vector>

#include "clue/cnf.hpp"
#include "clue/error.hpp"

namespace clue {

struct assignment {
  std::vector<bool> values;  // values[var - 1]

  bool value(int var) const { return values.at(static_cast<size_t>(var) - 1); }
  bool satisfies(const literal& l) const { return value(l.var) != l.negated; }
};

struct solve_stats {
  std::uint64_t conflicts = 0;
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t restarts = 0;
  std::uint64_t learned = 0;
  std::uint64_t seed = 0;
};

struct solve_result {
  bool satisfiable = false;
  assignment model;            // total over all variables when satisfiable
  std::vector<literal> core;   // subset of the assumptions when not
  solve_stats stats;
};

inline bool satisfies(const assignment& a, const clause& cl) {
  for (const auto& l : cl.lits)
    if (a.satisfies(l)) return true;
  return false;
}

inline bool verify_model(const cnf_formula& f, const assignment& a) {
  if (static_cast<int>(a.values.size()) < f.var_count) return false;
  for (const auto& cl : f.clauses)
    if (!satisfies(a, cl)) return false;
  return true;
}

class sat_solver {
 public:
  explicit sat_solver(cnf_formula f, std::uint64_t seed = 0)
      : nvars_(f.var_count), original_(std::move(f)), order_(activity_) {
    stats_.seed = seed;
    assigns_.assign(nvars_, l_undef);
    level_.assign(nvars_, 0);
    reason_.assign(nvars_, -1);
    activity_.assign(nvars_, 0.0);
    polarity_.assign(nvars_, 0);
    seen_.assign(nvars_, 0);
    watches_.assign(2 * static_cast<size_t>(nvars_), {});
    for (int v = 0; v < nvars_; ++v) order_.insert(v);
    for (const auto& cl : original_.clauses) add_input_clause(cl);
  }

  sat_solver(const sat_solver&) = delete;
  sat_solver& operator=(const sat_solver&) = delete;

  solve_result solve() { return solve_under_assumptions({}); }

  solve_result solve_under_assumptions(const std::vector<literal>& assumptions) {
    solve_stats entry = stats_;
    solve_result res;

    cancel_until(0);
    assumptions_.clear();
    for (const auto& a : assumptions) {
      if (a.var < 1 || a.var > nvars_)
        fail(errc::invalid_config, "assumption on unknown variable " + std::to_string(a.var));
      assumptions_.push_back(ilit(a.var - 1, a.negated));
    }

    bool sat = ok_ && search(res);
    if (sat) {
      res.satisfiable = true;
      res.model.values.resize(nvars_);
      for (int v = 0; v < nvars_; ++v) {
        assert(assigns_[v] != l_undef);
        res.model.values[v] = assigns_[v] == l_true;
      }
      if (!verify_model(original_, res.model))
        fail(errc::internal_error, "model does not satisfy the input formula");
    }
    cancel_until(0);

    res.stats.conflicts = stats_.conflicts - entry.conflicts;
    res.stats.decisions = stats_.decisions - entry.decisions;
    res.stats.propagations = stats_.propagations - entry.propagations;
    res.stats.restarts = stats_.restarts - entry.restarts;
    res.stats.learned = stats_.learned - entry.learned;
    res.stats.seed = stats_.seed;
    return res;
  }

  const solve_stats& cumulative_stats() const { return stats_; }

 private:
  enum : std::uint8_t { l_false = 0, l_true = 1, l_undef = 2 };

  struct cls {
    std::vector<int> lits;
    double activity = 0.0;
    bool learnt = false;
    bool removed = false;
  };

  struct watcher {
    int cref;
    int blocker;
  };

  // Max-heap over variable activity; equal activities order by lower index
  // so the decision sequence is reproducible.
  class var_heap {
   public:
    explicit var_heap(const std::vector<double>& act) : act_(act) {}

    bool empty() const { return heap_.empty(); }

    bool contains(int v) const {
      return v < static_cast<int>(pos_.size()) && pos_[v] >= 0;
    }

    void insert(int v) {
      if (contains(v)) return;
      if (static_cast<int>(pos_.size()) <= v) pos_.resize(v + 1, -1);
      pos_[v] = static_cast<int>(heap_.size());
      heap_.push_back(v);
      up(pos_[v]);
    }

    int pop() {
      int v = heap_[0];
      heap_[0] = heap_.back();
      pos_[heap_[0]] = 0;
      heap_.pop_back();
      pos_[v] = -1;
      if (!heap_.empty()) down(0);
      return v;
    }

    void bumped(int v) {
      if (contains(v)) up(pos_[v]);
    }

   private:
    bool before(int a, int b) const {
      return act_[a] > act_[b] || (act_[a] == act_[b] && a < b);
    }

    void up(int i) {
      int v = heap_[i];
      while (i > 0) {
        int parent = (i - 1) / 2;
        if (!before(v, heap_[parent])) break;
        heap_[i] = heap_[parent];
        pos_[heap_[i]] = i;
        i = parent;
      }
      heap_[i] = v;
      pos_[v] = i;
    }

    void down(int i) {
      int v = heap_[i];
      int n = static_cast<int>(heap_.size());
      while (true) {
        int child = 2 * i + 1;
        if (child >= n) break;
        if (child + 1 < n && before(heap_[child + 1], heap_[child])) ++child;
        if (!before(heap_[child], v)) break;
        heap_[i] = heap_[child];
        pos_[heap_[i]] = i;
        i = child;
      }
      heap_[i] = v;
      pos_[v] = i;
    }

    const std::vector<double>& act_;
    std::vector<int> heap_;
    std::vector<int> pos_;
  };

  static int ilit(int var0, bool negated) { return var0 * 2 + (negated ? 1 : 0); }
  static int ivar(int l) { return l >> 1; }
  static bool isign(int l) { return l & 1; }
  static int ineg(int l) { return l ^ 1; }
  literal external(int l) const { return {ivar(l) + 1, isign(l)}; }

  std::uint8_t value(int l) const {
    std::uint8_t a = assigns_[ivar(l)];
    if (a == l_undef) return l_undef;
    return static_cast<std::uint8_t>(a ^ (l & 1));
  }

  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  void add_input_clause(const clause& in) {
    if (!ok_) return;
    std::vector<int> lits;
    lits.reserve(in.lits.size());
    bool satisfied = false;
    for (const auto& l : in.lits) {
      int p = ilit(l.var - 1, l.negated);
      std::uint8_t v = value(p);
      if (v == l_true) { satisfied = true; break; }
      if (v == l_undef) lits.push_back(p);
    }
    if (satisfied) return;
    if (lits.empty()) { ok_ = false; return; }
    if (lits.size() == 1) {
      unchecked_enqueue(lits[0], -1);
      return;
    }
    int cref = static_cast<int>(clauses_.size());
    clauses_.push_back({std::move(lits), 0.0, false, false});
    attach(cref);
  }

  void attach(int cref) {
    const cls& c = clauses_[cref];
    assert(c.lits.size() >= 2);
    watches_[ineg(c.lits[0])].push_back({cref, c.lits[1]});
    watches_[ineg(c.lits[1])].push_back({cref, c.lits[0]});
  }

  void detach(int cref) {
    const cls& c = clauses_[cref];
    for (int i = 0; i < 2; ++i) {
      auto& ws = watches_[ineg(c.lits[i])];
      std::erase_if(ws, [cref](const watcher& w) { return w.cref == cref; });
    }
  }

  void unchecked_enqueue(int p, int from) {
    int v = ivar(p);
    assert(assigns_[v] == l_undef);
    assigns_[v] = isign(p) ? l_false : l_true;
    level_[v] = decision_level();
    reason_[v] = from;
    trail_.push_back(p);
  }

  // Returns the conflicting clause ref, or -1 when propagation completes.
  int propagate() {
    int confl = -1;
    while (qhead_ < trail_.size()) {
      int p = trail_[qhead_++];
      ++stats_.propagations;
      auto& ws = watches_[p];
      size_t i = 0, j = 0;
      while (i < ws.size()) {
        watcher w = ws[i];
        if (value(w.blocker) == l_true) {
          ws[j++] = ws[i++];
          continue;
        }
        cls& c = clauses_[w.cref];
        int false_lit = ineg(p);
        if (c.lits[0] == false_lit) std::swap(c.lits[0], c.lits[1]);
        assert(c.lits[1] == false_lit);
        ++i;

        int first = c.lits[0];
        if (first != w.blocker && value(first) == l_true) {
          ws[j++] = {w.cref, first};
          continue;
        }
        bool found = false;
        for (size_t k = 2; k < c.lits.size(); ++k) {
          if (value(c.lits[k]) != l_false) {
            std::swap(c.lits[1], c.lits[k]);
            watches_[ineg(c.lits[1])].push_back({w.cref, first});
            found = true;
            break;
          }
        }
        if (found) continue;

        // unit or conflicting
        ws[j++] = {w.cref, first};
        if (value(first) == l_false) {
          confl = w.cref;
          qhead_ = trail_.size();
          while (i < ws.size()) ws[j++] = ws[i++];
        } else {
          unchecked_enqueue(first, w.cref);
        }
      }
      ws.resize(j);
      if (confl != -1) break;
    }
    return confl;
  }

  void cancel_until(int target) {
    if (decision_level() <= target) return;
    int bound = trail_lim_[target];
    for (int i = static_cast<int>(trail_.size()) - 1; i >= bound; --i) {
      int v = ivar(trail_[i]);
      polarity_[v] = assigns_[v] == l_true ? 1 : 0;  // phase saving
      assigns_[v] = l_undef;
      order_.insert(v);
    }
    trail_.resize(bound);
    trail_lim_.resize(target);
    qhead_ = trail_.size();
  }

  void bump_var(int v) {
    activity_[v] += var_inc_;
    if (activity_[v] > 1e100) {
      for (auto& a : activity_) a *= 1e-100;
      var_inc_ *= 1e-100;
    }
    order_.bumped(v);
  }

  void bump_clause(cls& c) {
    c.activity += cla_inc_;
    if (c.activity > 1e20) {
      for (auto& lc : clauses_)
        if (lc.learnt) lc.activity *= 1e-20;
      cla_inc_ *= 1e-20;
    }
  }

  unsigned abstract_level(int v) const { return 1u << (level_[v] & 31); }

  // Checks whether p is implied by literals already marked seen, walking its
  // implication graph; used to shrink the learned clause.
  bool lit_redundant(int p, unsigned abstract_levels) {
    analyze_stack_.clear();
    analyze_stack_.push_back(p);
    size_t top = analyze_toclear_.size();
    while (!analyze_stack_.empty()) {
      int q = analyze_stack_.back();
      analyze_stack_.pop_back();
      assert(reason_[ivar(q)] != -1);
      const cls& c = clauses_[reason_[ivar(q)]];
      for (size_t k = 1; k < c.lits.size(); ++k) {
        int l = c.lits[k];
        int v = ivar(l);
        if (seen_[v] || level_[v] == 0) continue;
        if (reason_[v] != -1 && (abstract_level(v) & abstract_levels) != 0) {
          seen_[v] = 1;
          analyze_stack_.push_back(l);
          analyze_toclear_.push_back(l);
        } else {
          for (size_t k2 = top; k2 < analyze_toclear_.size(); ++k2)
            seen_[ivar(analyze_toclear_[k2])] = 0;
          analyze_toclear_.resize(top);
          return false;
        }
      }
    }
    return true;
  }

  // First-UIP learning. Fills out_learnt (asserting literal first) and
  // returns the backjump level.
  int analyze(int confl, std::vector<int>& out_learnt) {
    int path_count = 0;
    int p = -1;
    out_learnt.clear();
    out_learnt.push_back(-1);  // slot for the asserting literal
    int index = static_cast<int>(trail_.size()) - 1;

    do {
      assert(confl != -1);
      cls& c = clauses_[confl];
      if (c.learnt) bump_clause(c);
      for (size_t k = (p == -1 ? 0 : 1); k < c.lits.size(); ++k) {
        int q = c.lits[k];
        int v = ivar(q);
        if (seen_[v] || level_[v] == 0) continue;
        bump_var(v);
        seen_[v] = 1;
        if (level_[v] >= decision_level())
          ++path_count;
        else
          out_learnt.push_back(q);
      }
      while (!seen_[ivar(trail_[index--])]) {}
      p = trail_[index + 1];
      confl = reason_[ivar(p)];
      seen_[ivar(p)] = 0;
      --path_count;
    } while (path_count > 0);
    out_learnt[0] = ineg(p);

    // minimize: drop literals implied by the rest of the clause
    analyze_toclear_ = out_learnt;
    unsigned abstract_levels = 0;
    for (size_t k = 1; k < out_learnt.size(); ++k)
      abstract_levels |= abstract_level(ivar(out_learnt[k]));
    size_t kept = 1;
    for (size_t k = 1; k < out_learnt.size(); ++k) {
      int v = ivar(out_learnt[k]);
      if (reason_[v] == -1 || !lit_redundant(out_learnt[k], abstract_levels))
        out_learnt[kept++] = out_learnt[k];
    }
    out_learnt.resize(kept);
    for (int q : analyze_toclear_) seen_[ivar(q)] = 0;

    if (out_learnt.size() == 1) return 0;
    size_t max_i = 1;
    for (size_t k = 2; k < out_learnt.size(); ++k)
      if (level_[ivar(out_learnt[k])] > level_[ivar(out_learnt[max_i])]) max_i = k;
    std::swap(out_learnt[1], out_learnt[max_i]);
    return level_[ivar(out_learnt[1])];
  }

  // Walks reasons back from a failed assumption to collect the subset of
  // assumptions responsible. p is the assumption literal found false.
  std::vector<literal> analyze_final(int p) {
    std::vector<literal> out{external(p)};
    if (decision_level() == 0) return out;
    seen_[ivar(p)] = 1;
    for (int i = static_cast<int>(trail_.size()) - 1;
         i >= static_cast<int>(trail_lim_[0]); --i) {
      int v = ivar(trail_[i]);
      if (!seen_[v]) continue;
      if (reason_[v] == -1) {
        assert(level_[v] > 0);
        out.push_back(external(trail_[i]));  // an assumption decision
      } else {
        const cls& c = clauses_[reason_[v]];
        for (size_t k = 1; k < c.lits.size(); ++k)
          if (level_[ivar(c.lits[k])] > 0) seen_[ivar(c.lits[k])] = 1;
      }
      seen_[v] = 0;
    }
    seen_[ivar(p)] = 0;
    return out;
  }

  void reduce_db() {
    // Drop the less active half of the learned clauses, keeping binary
    // clauses and clauses currently acting as a reason.
    std::stable_sort(learnt_refs_.begin(), learnt_refs_.end(), [this](int a, int b) {
      return clauses_[a].activity < clauses_[b].activity;
    });
    auto locked = [this](int cref) {
      const cls& c = clauses_[cref];
      return value(c.lits[0]) == l_true && reason_[ivar(c.lits[0])] == cref;
    };
    std::vector<int> keep;
    keep.reserve(learnt_refs_.size());
    size_t half = learnt_refs_.size() / 2;
    for (size_t i = 0; i < learnt_refs_.size(); ++i) {
      int cref = learnt_refs_[i];
      if (i < half && clauses_[cref].lits.size() > 2 && !locked(cref)) {
        detach(cref);
        clauses_[cref].removed = true;
        clauses_[cref].lits.clear();
        clauses_[cref].lits.shrink_to_fit();
      } else {
        keep.push_back(cref);
      }
    }
    learnt_refs_ = std::move(keep);
    max_learnts_ = max_learnts_ * 13 / 10;
  }

  // Core loop; returns true when a model was found. When an assumption
  // fails, fills res.core and returns false.
  bool search(solve_result& res) {
    if (!ok_) return false;
    std::uint64_t restart_limit = 100;  // grows by 1.5x on every restart
    std::uint64_t conflicts_here = 0;

    while (true) {
      int confl = propagate();
      if (confl != -1) {
        ++stats_.conflicts;
        ++conflicts_here;
        if (decision_level() == 0) return false;  // unsat outright

        std::vector<int> learnt;
        int bt = analyze(confl, learnt);
        cancel_until(bt);
        if (learnt.size() == 1) {
          unchecked_enqueue(learnt[0], -1);
        } else {
          int cref = static_cast<int>(clauses_.size());
          clauses_.push_back({std::move(learnt), cla_inc_, true, false});
          attach(cref);
          learnt_refs_.push_back(cref);
          unchecked_enqueue(clauses_[cref].lits[0], cref);
        }
        ++stats_.learned;
        var_inc_ /= var_decay_;
        cla_inc_ /= cla_decay_;
        continue;
      }

      if (conflicts_here >= restart_limit) {
        conflicts_here = 0;
        restart_limit = restart_limit * 3 / 2;
        ++stats_.restarts;
        cancel_until(0);
        continue;
      }
      if (static_cast<int>(learnt_refs_.size()) >= max_learnts_) reduce_db();

      int next = -1;
      while (decision_level() < static_cast<int>(assumptions_.size())) {
        int p = assumptions_[decision_level()];
        if (value(p) == l_true) {
          trail_lim_.push_back(static_cast<int>(trail_.size()));  // hold a level
        } else if (value(p) == l_false) {
          res.core = analyze_final(p);
          return false;
        } else {
          next = p;
          break;
        }
      }
      if (next == -1) {
        while (!order_.empty()) {
          int v = order_.pop();
          if (assigns_[v] == l_undef) {
            next = ilit(v, polarity_[v] == 0);
            break;
          }
        }
        if (next == -1) return true;  // everything assigned
        ++stats_.decisions;
      }
      trail_lim_.push_back(static_cast<int>(trail_.size()));
      unchecked_enqueue(next, -1);
    }
  }

  int nvars_;
  bool ok_ = true;
  cnf_formula original_;

  std::vector<cls> clauses_;
  std::vector<int> learnt_refs_;
  std::vector<std::vector<watcher>> watches_;

  std::vector<std::uint8_t> assigns_;
  std::vector<int> level_;
  std::vector<int> reason_;
  std::vector<int> trail_;
  std::vector<int> trail_lim_;
  size_t qhead_ = 0;

  std::vector<double> activity_;
  double var_inc_ = 1.0;
  double cla_inc_ = 1.0;
  static constexpr double var_decay_ = 0.95;
  static constexpr double cla_decay_ = 0.999;
  std::vector<std::uint8_t> polarity_;
  var_heap order_;

  std::vector<std::uint8_t> seen_;
  std::vector<int> analyze_stack_;
  std::vector<int> analyze_toclear_;

  std::vector<int> assumptions_;
  int max_learnts_ = 4000;
  solve_stats stats_;
};

inline solve_result solve(const cnf_formula& f, std::uint64_t seed = 0) {
  sat_solver s(f, seed);
  return s.solve();
}

inline solve_result solve_under_assumptions(const cnf_formula& f,
                                            const std::vector<literal>& assumptions,
                                            std::uint64_t seed = 0) {
  sat_solver s(f, seed);
  return s.solve_under_assumptions(assumptions);
}

}  // namespace clue
