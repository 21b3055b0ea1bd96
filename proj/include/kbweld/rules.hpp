#pragma once

#include <algorithm>
#include <cassert>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "kbweld/fsa.hpp"
#include "kbweld/welding.hpp"
#include "kbweld/words.hpp"

namespace kbweld {

// ---- the shortlex pair comparator ----
//
// A fixed five-state machine over two-variable labels accepting exactly the
// padded pairs (u, v) such that u and v have no common prefix, u is
// shortlex-greater than v, and |v| <= |u| <= |v| + 2.  Intersecting a rule
// automaton with it extracts the usable rules.

enum CmpState : int {
  kCmpStart = 0,   // nothing read
  kCmpGreater = 1,  // first letters differ, left side bigger (final)
  kCmpLess = 2,     // first letters differ, left side smaller; must out-length
  kCmpPad1 = 3,     // one padding column read (final)
  kCmpPad2 = 4,     // two padding columns read (final)
};

constexpr int kCmpNumStates = 5;

inline bool comparator_final(int s) { return s == kCmpGreater || s == kCmpPad1 || s == kCmpPad2; }

/// One deterministic step of the comparator; -1 when undefined.
inline int comparator_step(int s, Letter x, Letter y, Letter pad) {
  bool padded = (y == pad);
  switch (s) {
    case kCmpStart:
      if (padded) return kCmpPad1;
      if (x > y) return kCmpGreater;
      if (x < y) return kCmpLess;
      return -1;  // equal first letters: common prefix
    case kCmpGreater:
      return padded ? kCmpPad1 : kCmpGreater;
    case kCmpLess:
      return padded ? kCmpPad1 : kCmpLess;
    case kCmpPad1:
      return padded ? kCmpPad2 : -1;
    default:
      return -1;
  }
}

inline Nfa comparator_nfa(const Alphabet& a) {
  Nfa n;
  n.num_states = kCmpNumStates;
  n.num_labels = a.num_pair_labels();
  n.initials = {kCmpStart};
  n.finals = {kCmpGreater, kCmpPad1, kCmpPad2};
  for (int s = 0; s < kCmpNumStates; ++s) {
    for (Letter x = 0; x < a.size(); ++x) {
      for (Letter y = 0; y <= a.size(); ++y) {
        int t = comparator_step(s, x, y, a.pad());
        if (t >= 0) n.add_arrow(s, a.pair_label(x, y), t);
      }
    }
  }
  return n;
}

// ---- frozen rule automaton ----

/// A welded two-variable automaton whose single state `start` is both
/// initial and final, with a word label per state recording the reduced
/// word difference it stands for, and arrow tables indexed so that all
/// arrows with a given left letter are retrieved in one probe.  Frozen:
/// reduction engines hold read-only views of it.
struct RuleAutomaton {
  Alphabet alphabet;
  int num_states = 0;
  int start = 0;
  std::vector<std::vector<std::pair<int, int>>> fwd;  // sorted by pair label
  std::vector<std::vector<std::pair<int, int>>> bwd;
  std::vector<Word> labels;

  std::optional<int> fwd_step(int s, int label) const { return probe(fwd[s], label); }
  std::optional<int> bwd_step(int s, int label) const { return probe(bwd[s], label); }

  /// All forward arrows from s whose label has left letter x.
  std::span<const std::pair<int, int>> fwd_range(int s, Letter x) const { return range(fwd[s], x); }

  /// All backward slots of s (arrows into s) whose label has left letter x.
  std::span<const std::pair<int, int>> bwd_range(int s, Letter x) const { return range(bwd[s], x); }

  Nfa to_nfa() const {
    Nfa n;
    n.num_states = num_states;
    n.num_labels = alphabet.num_pair_labels();
    n.initials = {start};
    n.finals = {start};
    for (int s = 0; s < num_states; ++s)
      for (auto& [l, t] : fwd[s]) n.add_arrow(s, l, t);
    return n;
  }

  CanonicalFsa canonical() const { return canonical_form(to_nfa()); }

  size_t num_arrows() const {
    size_t n = 0;
    for (auto& row : fwd) n += row.size();
    return n;
  }

 private:
  static std::optional<int> probe(const std::vector<std::pair<int, int>>& row, int label) {
    auto it = std::lower_bound(row.begin(), row.end(), std::pair<int, int>{label, -1});
    if (it != row.end() && it->first == label) return it->second;
    return std::nullopt;
  }

  std::span<const std::pair<int, int>> range(const std::vector<std::pair<int, int>>& row, Letter x) const {
    int w = alphabet.size() + 1;
    auto lo = std::lower_bound(row.begin(), row.end(), std::pair<int, int>{x * w, -1});
    auto hi = std::lower_bound(row.begin(), row.end(), std::pair<int, int>{(x + 1) * w, -1});
    return {&*lo, static_cast<size_t>(hi - lo)};
  }
};

// ---- mutable rule automaton (the word-difference graph) ----

/// The evolving rule automaton rules are sewn into during completion.  It
/// owns the welding core plus the per-state word labels and needed marks,
/// and keeps itself normalized: any arrow labelled (x, x) touching the start
/// state forces its other endpoint into the start state, after which such
/// loops are removed.
class WordDiffAutomaton {
 public:
  explicit WordDiffAutomaton(Alphabet a) : alphabet_(std::move(a)), g_(alphabet_.num_pair_labels()) {
    start_ = g_.add_state();
    labels_.push_back({});
    st_needed_.push_back(1);
    ar_needed_.emplace_back();
    by_label_[{}].push_back(start_);
  }

  const Alphabet& alphabet() const { return alphabet_; }
  int start() const { return g_.find(start_); }
  int canonical(int s) const { return g_.find(s); }

  int new_state(const Word& label, bool needed) {
    int s = g_.add_state();
    labels_.push_back(label);
    st_needed_.push_back(needed ? 1 : 0);
    ar_needed_.emplace_back();
    by_label_[label].push_back(s);
    return s;
  }

  const Word& label(int s) const { return labels_[g_.find(s)]; }

  std::optional<int> state_with_label(const Word& w) const {
    auto it = by_label_.find(w);
    if (it == by_label_.end()) return std::nullopt;
    for (int cand : it->second) {
      int r = g_.find(cand);
      if (g_.is_live(r) && labels_[r] == w) return r;
    }
    return std::nullopt;
  }

  void add_arrow(int s, int label, int t) { g_.add_arrow(s, label, t); }
  std::optional<int> fwd_step(int s, int label) const { return g_.fwd_step(s, label); }
  std::optional<int> bwd_step(int s, int label) const { return g_.bwd_step(s, label); }
  void join(int a, int b) { g_.join(a, b); }
  bool has_pending() const { return g_.has_pending(); }

  void mark_state_needed(int s) { st_needed_[g_.find(s)] = 1; }

  void mark_arrow_needed(int s, int label) { ar_needed_[g_.find(s)].insert(label); }

  bool state_needed(int s) const { return st_needed_[g_.find(s)] != 0; }

  bool arrow_needed(int s, int label) const { return ar_needed_[g_.find(s)].count(label) != 0; }

  void mark_all_needed() {
    for (int s : g_.live_states()) {
      st_needed_[s] = 1;
      for (auto& [l, t] : g_.fwd_row(s)) ar_needed_[s].insert(l);
    }
  }

  void clear_needed() {
    for (int s : g_.live_states()) {
      st_needed_[s] = 0;
      ar_needed_[s].clear();
    }
    st_needed_[start()] = 1;
  }

  /// Drains pending coincidences and restores the start-state normalization,
  /// merging labels (shortlex-least wins) and needed marks along the way.
  void settle(std::mt19937* rng = nullptr) {
    auto hook = [this](int keep, int drop) {
      if (shortlex_less(labels_[drop], labels_[keep])) {
        labels_[keep] = labels_[drop];
        by_label_[labels_[keep]].push_back(keep);
      }
      if (st_needed_[drop]) st_needed_[keep] = 1;
      ar_needed_[keep].insert(ar_needed_[drop].begin(), ar_needed_[drop].end());
      ar_needed_[drop].clear();
    };
    for (;;) {
      g_.process(hook, rng);
      int s0 = start();
      bool changed = false;
      auto sweep = [&](const std::map<int, int>& row) {
        for (auto& [l, other] : row) {
          if (alphabet_.pair_left(l) != alphabet_.pair_right(l)) continue;
          int o = g_.find(other);
          if (o != s0) {
            g_.join(o, s0);
            changed = true;
          }
        }
      };
      sweep(g_.fwd_row(s0));
      sweep(g_.bwd_row(s0));
      if (!changed && !g_.has_pending()) break;
    }
    // start-state loops on (x, x) labels carry no usable rule content
    int s0 = start();
    for (Letter x = 0; x < alphabet_.size(); ++x) {
      int l = alphabet_.pair_label(x, x);
      auto t = g_.fwd_step(s0, l);
      if (t && *t == s0) g_.remove_arrow(s0, l);
    }
  }

  /// Reads the padded rule forward from the start state, following existing
  /// arrows and creating labelled states for the rest; the final arrow lands
  /// on the start state (coincidences are queued automatically).  reduce_fn
  /// maps each new word difference to its stored representative.
  void add_rule_path(const Rule& r, const std::function<Word(const Word&)>& reduce_fn, bool needed) {
    PaddedPair pp = pad(r.lhs, r.rhs, alphabet_);
    if (pp.empty()) return;
    int cur = start();
    if (needed) mark_state_needed(cur);
    for (size_t i = 0; i < pp.size(); ++i) {
      int lbl = alphabet_.pair_label(pp[i].first, pp[i].second);
      int next;
      if (auto t = g_.fwd_step(cur, lbl)) {
        next = *t;
      } else if (i + 1 == pp.size()) {
        next = start();
        g_.add_arrow(cur, lbl, next);
      } else {
        Word diff = formal_inverse({pp[i].first}, alphabet_);
        diff = concat(diff, label(cur));
        if (pp[i].second != alphabet_.pad()) diff.push_back(pp[i].second);
        diff = reduce_fn(diff);
        auto existing = state_with_label(diff);
        next = existing ? *existing : new_state(diff, needed);
        g_.add_arrow(cur, lbl, next);
      }
      if (needed) {
        mark_arrow_needed(cur, lbl);
        mark_state_needed(next);
      }
      cur = next;
      if (g_.has_pending()) {
        settle();
        cur = g_.find(cur);
      }
    }
    settle();
  }

  /// Removes states and arrows not marked needed, then anything no longer on
  /// an accepted path through the start state.
  void prune_unneeded() {
    settle();
    st_needed_[start()] = 1;
    for (int s : g_.live_states()) {
      if (!st_needed_[s]) {
        g_.erase_state(s);
        continue;
      }
      std::vector<int> drop;
      for (auto& [l, t] : g_.fwd_row(s))
        if (!ar_needed_[s].count(l)) drop.push_back(l);
      for (int l : drop) g_.remove_arrow(s, l);
    }
    trim_to_start();
    settle();
  }

  size_t num_live_states() const { return g_.num_live_states(); }
  size_t num_arrows() const { return g_.num_arrows(); }
  const WeldGraph::Stats& stats() const { return g_.stats(); }

  std::vector<int> live_states() const { return g_.live_states(); }

  void relabel(int s, const Word& w) {
    int r = g_.find(s);
    labels_[r] = w;
    by_label_[w].push_back(r);
  }

  RuleAutomaton freeze() const {
    if (g_.has_pending()) throw std::logic_error("freeze with pending coincidences");
    std::vector<int> live = g_.live_states();
    std::vector<int> id_of(labels_.size(), -1);
    for (size_t i = 0; i < live.size(); ++i) id_of[live[i]] = static_cast<int>(i);
    RuleAutomaton ra;
    ra.alphabet = alphabet_;
    ra.num_states = static_cast<int>(live.size());
    ra.start = id_of[start()];
    ra.fwd.resize(ra.num_states);
    ra.bwd.resize(ra.num_states);
    ra.labels.resize(ra.num_states);
    for (size_t i = 0; i < live.size(); ++i) {
      ra.labels[i] = labels_[live[i]];
      for (auto& [l, t] : g_.fwd_row(live[i])) ra.fwd[i].emplace_back(l, id_of[g_.find(t)]);
      for (auto& [l, s] : g_.bwd_row(live[i])) ra.bwd[i].emplace_back(l, id_of[g_.find(s)]);
      std::sort(ra.fwd[i].begin(), ra.fwd[i].end());
      std::sort(ra.bwd[i].begin(), ra.bwd[i].end());
    }
    return ra;
  }

 private:
  void trim_to_start() {
    int s0 = start();
    std::set<int> fwd_reach{s0}, bwd_reach{s0};
    std::vector<int> stack{s0};
    while (!stack.empty()) {
      int s = stack.back();
      stack.pop_back();
      for (auto& [l, t] : g_.fwd_row(s)) {
        int r = g_.find(t);
        if (fwd_reach.insert(r).second) stack.push_back(r);
      }
    }
    stack.push_back(s0);
    while (!stack.empty()) {
      int s = stack.back();
      stack.pop_back();
      for (auto& [l, t] : g_.bwd_row(s)) {
        int r = g_.find(t);
        if (bwd_reach.insert(r).second) stack.push_back(r);
      }
    }
    for (int s : g_.live_states()) {
      if (!fwd_reach.count(s) || !bwd_reach.count(s)) g_.erase_state(s);
    }
  }

  Alphabet alphabet_;
  WeldGraph g_;
  std::vector<Word> labels_;
  std::vector<char> st_needed_;
  std::vector<std::set<int>> ar_needed_;
  std::map<Word, std::vector<int>> by_label_;
  int start_;
};

// ---- construction helpers ----

/// The straight-line machine reading one padded rule: n+1 states, first
/// initial, last final.
inline Nfa rule_path_nfa(const Rule& r, const Alphabet& a) {
  if (r.lhs == r.rhs) throw std::invalid_argument("rule with equal sides");
  PaddedPair pp = pad(r.lhs, r.rhs, a);
  Nfa n;
  n.num_labels = a.num_pair_labels();
  int prev = n.add_state();
  n.initials = {prev};
  for (auto& [x, y] : pp) {
    int next = n.add_state();
    n.add_arrow(prev, a.pair_label(x, y), next);
    prev = next;
  }
  n.finals = {prev};
  return n;
}

inline Nfa disjoint_union(std::span<const Nfa> machines) {
  Nfa out;
  if (machines.empty()) return out;
  out.num_labels = machines[0].num_labels;
  for (const auto& m : machines) {
    int base = out.num_states;
    out.num_states += m.num_states;
    for (auto& ar : m.arrows) out.add_arrow(ar.src + base, ar.label, ar.dst + base);
    for (int s : m.initials) out.initials.push_back(s + base);
    for (int s : m.finals) out.finals.push_back(s + base);
  }
  return out;
}

/// Builds a rule automaton by reading each rule's path into a fresh
/// word-difference graph (labels freely reduced), welding as it goes.
inline WordDiffAutomaton build_rule_automaton(const std::vector<Rule>& rules, const Alphabet& a) {
  WordDiffAutomaton wd(a);
  auto fr = [&a](const Word& w) { return free_reduce(w, a); };
  for (const auto& r : rules) wd.add_rule_path(r, fr, true);
  wd.settle();
  return wd;
}

// ---- rule extraction ----

/// Product with the comparator accepting exactly the usable rules
/// L(ra) ∩ L(comparator).
inline Nfa rule_set_nfa(const RuleAutomaton& ra) {
  return product_intersect(ra.to_nfa(), comparator_nfa(ra.alphabet));
}

/// Product with the comparator restricted so that accepted rules have no
/// proper prefix and no proper suffix that is itself a rule: arrows out of
/// final product states are omitted, and the product state (start,
/// less-than) is omitted entirely together with its arrows.
inline Nfa rule_core_nfa(const RuleAutomaton& ra) {
  const Alphabet& a = ra.alphabet;
  std::map<std::pair<int, int>, int> ids;
  std::vector<std::pair<int, int>> states;
  Nfa out;
  out.num_labels = a.num_pair_labels();
  std::vector<int> worklist;
  auto is_final_pair = [&](int s, int t) { return s == ra.start && comparator_final(t); };
  auto intern = [&](int s, int t) {
    auto key = std::make_pair(s, t);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    int id = out.add_state();
    ids.emplace(key, id);
    states.push_back(key);
    worklist.push_back(id);
    return id;
  };
  intern(ra.start, kCmpStart);
  out.initials = {0};
  while (!worklist.empty()) {
    int id = worklist.back();
    worklist.pop_back();
    auto [s, t] = states[id];
    if (is_final_pair(s, t)) continue;  // no arrows out of final product states
    for (auto& [lbl, s2] : ra.fwd[s]) {
      int t2 = comparator_step(t, a.pair_left(lbl), a.pair_right(lbl), a.pad());
      if (t2 < 0) continue;
      if (s2 == ra.start && t2 == kCmpLess) continue;  // omitted state
      out.add_arrow(id, lbl, intern(s2, t2));
    }
  }
  for (int id = 0; id < out.num_states; ++id) {
    auto [s, t] = states[id];
    if (is_final_pair(s, t)) out.finals.push_back(id);
  }
  if (out.finals.empty()) {
    Nfa empty;
    empty.num_labels = out.num_labels;
    return empty;
  }
  return trim(out);
}

/// All rules with |lhs| + |rhs| <= max_total_len accepted jointly by the
/// rule automaton and the comparator, unpadded.
inline std::vector<Rule> enumerate_rules(const RuleAutomaton& ra, int max_total_len) {
  Nfa prod = rule_set_nfa(ra);
  std::vector<Rule> out;
  for (const Word& padded : enumerate_language(prod, max_total_len)) {
    PaddedPair pp;
    for (int lbl : padded) pp.emplace_back(ra.alphabet.pair_left(lbl), ra.alphabet.pair_right(lbl));
    auto [lhs, rhs] = unpad(pp, ra.alphabet);
    if (lhs.size() + rhs.size() <= static_cast<size_t>(max_total_len)) out.push_back({std::move(lhs), std::move(rhs)});
  }
  std::sort(out.begin(), out.end(), [](const Rule& x, const Rule& y) { return rule_cmp(x, y) == std::strong_ordering::less; });
  return out;
}

/// Membership of one rule in L(ra) ∩ L(comparator), by a deterministic walk.
inline bool accepts_rule(const RuleAutomaton& ra, const Rule& r) {
  const Alphabet& a = ra.alphabet;
  int s = ra.start;
  int t = kCmpStart;
  for (auto& [x, y] : pad(r.lhs, r.rhs, a)) {
    auto s2 = ra.fwd_step(s, a.pair_label(x, y));
    if (!s2) return false;
    int t2 = comparator_step(t, x, y, a.pad());
    if (t2 < 0) return false;
    s = *s2;
    t = t2;
  }
  return s == ra.start && comparator_final(t);
}

// ---- presentations ----

struct Presentation {
  Alphabet alphabet;
  std::vector<Word> relators;
};

}  // namespace kbweld
