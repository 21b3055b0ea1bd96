#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kbweld/words.hpp"

namespace kbweld {

constexpr int kEpsilon = -1;

/// Non-deterministic automaton over an abstract label set {0 .. num_labels-1}
/// plus epsilon arrows.
struct Nfa {
  struct Arrow {
    int src;
    int label;  // kEpsilon for epsilon arrows
    int dst;
    auto operator<=>(const Arrow&) const = default;
  };

  int num_states = 0;
  int num_labels = 0;
  std::vector<Arrow> arrows;
  std::vector<int> initials;
  std::vector<int> finals;

  int add_state() { return num_states++; }

  void add_arrow(int src, int label, int dst) { arrows.push_back({src, label, dst}); }

  bool is_final(int s) const { return std::find(finals.begin(), finals.end(), s) != finals.end(); }
};

/// Complete deterministic automaton; `dead` is the sink absorbing missing
/// arrows (-1 if the transition table happens to be total without one).
struct Dfa {
  int num_states = 0;
  int num_labels = 0;
  int initial = 0;
  int dead = -1;
  std::vector<int> transition;  // state * num_labels + label
  std::vector<char> final_flags;

  int step(int s, int label) const { return transition[static_cast<size_t>(s) * num_labels + label]; }

  bool accepts(std::span<const int> word) const {
    int s = initial;
    for (int x : word) s = step(s, x);
    return final_flags[s] != 0;
  }

  int live_states() const {
    int n = num_states;
    return dead >= 0 ? n - 1 : n;
  }
};

/// Partially deterministic automaton: at most one arrow per (state, label),
/// no epsilon arrows, a single initial state.
struct Pdfa {
  int num_states = 0;
  int num_labels = 0;
  int initial = 0;
  std::vector<std::vector<std::pair<int, int>>> out;  // sorted by label
  std::vector<int> finals;

  std::optional<int> step(int s, int label) const {
    const auto& row = out[s];
    auto it = std::lower_bound(row.begin(), row.end(), std::pair<int, int>{label, -1});
    if (it != row.end() && it->first == label) return it->second;
    return std::nullopt;
  }

  bool accepts(std::span<const int> word) const {
    int s = initial;
    for (int x : word) {
      auto t = step(s, x);
      if (!t) return false;
      s = *t;
    }
    return std::find(finals.begin(), finals.end(), s) != finals.end();
  }

  Nfa to_nfa() const {
    Nfa n;
    n.num_states = num_states;
    n.num_labels = num_labels;
    n.initials = {initial};
    n.finals = finals;
    for (int s = 0; s < num_states; ++s)
      for (auto& [l, t] : out[s]) n.add_arrow(s, l, t);
    return n;
  }
};

// ---- epsilon closure ----

inline std::vector<int> epsilon_closure(const Nfa& n, std::vector<int> seeds) {
  std::vector<char> in(n.num_states, 0);
  std::vector<int> stack;
  for (int s : seeds) {
    if (!in[s]) {
      in[s] = 1;
      stack.push_back(s);
    }
  }
  // adjacency for epsilon arrows only
  std::vector<std::vector<int>> eps(n.num_states);
  for (auto& a : n.arrows)
    if (a.label == kEpsilon) eps[a.src].push_back(a.dst);
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    for (int t : eps[s]) {
      if (!in[t]) {
        in[t] = 1;
        stack.push_back(t);
      }
    }
  }
  std::vector<int> out;
  for (int s = 0; s < n.num_states; ++s)
    if (in[s]) out.push_back(s);
  return out;
}

// ---- subset construction ----

struct InclusionPair {
  int p;  // language from p is contained in language from q
  int q;
};

namespace detail {

inline Dfa determinize_impl(const Nfa& n, std::span<const InclusionPair> pairs) {
  auto apply_pairs = [&](std::vector<int>& subset) {
    if (pairs.empty()) return;
    for (const auto& pr : pairs) {
      bool has_p = std::binary_search(subset.begin(), subset.end(), pr.p);
      bool has_q = std::binary_search(subset.begin(), subset.end(), pr.q);
      if (has_p && has_q) subset.erase(std::lower_bound(subset.begin(), subset.end(), pr.p));
    }
  };

  std::vector<std::vector<int>> per_label_targets(static_cast<size_t>(n.num_states) * n.num_labels);
  for (auto& a : n.arrows)
    if (a.label != kEpsilon) per_label_targets[static_cast<size_t>(a.src) * n.num_labels + a.label].push_back(a.dst);

  std::map<std::vector<int>, int> ids;
  std::vector<std::vector<int>> subsets;
  std::vector<int> worklist;

  auto intern = [&](std::vector<int> subset) {
    auto it = ids.find(subset);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(subsets.size());
    ids.emplace(subset, id);
    subsets.push_back(std::move(subset));
    worklist.push_back(id);
    return id;
  };

  std::vector<int> start = epsilon_closure(n, n.initials);
  apply_pairs(start);
  intern(std::move(start));

  std::vector<std::vector<int>> rows;  // transitions per subset id
  while (!worklist.empty()) {
    int id = worklist.back();
    worklist.pop_back();
    if (static_cast<size_t>(id) >= rows.size()) rows.resize(id + 1);
    std::vector<int> row(n.num_labels, -1);
    for (int l = 0; l < n.num_labels; ++l) {
      std::set<int> targets;
      for (int s : subsets[id]) {
        auto& ts = per_label_targets[static_cast<size_t>(s) * n.num_labels + l];
        targets.insert(ts.begin(), ts.end());
      }
      std::vector<int> next = epsilon_closure(n, std::vector<int>(targets.begin(), targets.end()));
      apply_pairs(next);
      row[l] = intern(std::move(next));
      if (static_cast<size_t>(id) >= rows.size()) rows.resize(id + 1);
    }
    rows[id] = std::move(row);
  }
  rows.resize(subsets.size());

  Dfa d;
  d.num_states = static_cast<int>(subsets.size());
  d.num_labels = n.num_labels;
  d.initial = 0;
  d.transition.assign(static_cast<size_t>(d.num_states) * d.num_labels, -1);
  d.final_flags.assign(d.num_states, 0);
  for (int id = 0; id < d.num_states; ++id) {
    for (int l = 0; l < n.num_labels; ++l) d.transition[static_cast<size_t>(id) * d.num_labels + l] = rows[id][l];
    for (int s : subsets[id]) {
      if (n.is_final(s)) {
        d.final_flags[id] = 1;
        break;
      }
    }
    if (subsets[id].empty()) d.dead = id;
  }
  return d;
}

}  // namespace detail

inline Dfa determinize(const Nfa& n) { return detail::determinize_impl(n, {}); }

/// Subset construction that drops state p from every constructed subset also
/// containing q, for each listed pair.  Valid whenever the language from p is
/// contained in the language from q and the epsilon closure of q avoids every
/// listed p; the caller is responsible for that contract.
inline Dfa determinize_modified(const Nfa& n, std::span<const InclusionPair> pairs) {
  return detail::determinize_impl(n, pairs);
}

// ---- minimization (Moore partition refinement) ----

inline Dfa minimize(const Dfa& d) {
  // restrict to states reachable from the initial state
  std::vector<int> reach;
  {
    std::vector<char> seen(d.num_states, 0);
    std::vector<int> stack{d.initial};
    seen[d.initial] = 1;
    while (!stack.empty()) {
      int s = stack.back();
      stack.pop_back();
      reach.push_back(s);
      for (int l = 0; l < d.num_labels; ++l) {
        int t = d.step(s, l);
        if (!seen[t]) {
          seen[t] = 1;
          stack.push_back(t);
        }
      }
    }
    std::sort(reach.begin(), reach.end());
  }
  std::vector<int> id_of(d.num_states, -1);
  for (size_t i = 0; i < reach.size(); ++i) id_of[reach[i]] = static_cast<int>(i);

  int n = static_cast<int>(reach.size());
  std::vector<int> cls(n);
  for (int i = 0; i < n; ++i) cls[i] = d.final_flags[reach[i]] ? 1 : 0;

  for (;;) {
    std::map<std::vector<int>, int> sig_ids;
    std::vector<int> next(n);
    for (int i = 0; i < n; ++i) {
      std::vector<int> sig;
      sig.reserve(d.num_labels + 1);
      sig.push_back(cls[i]);
      for (int l = 0; l < d.num_labels; ++l) sig.push_back(cls[id_of[d.step(reach[i], l)]]);
      auto [it, inserted] = sig_ids.emplace(std::move(sig), static_cast<int>(sig_ids.size()));
      next[i] = it->second;
    }
    if (next == cls) break;
    cls = std::move(next);
  }

  int num_classes = *std::max_element(cls.begin(), cls.end()) + 1;
  Dfa out;
  out.num_states = num_classes;
  out.num_labels = d.num_labels;
  out.initial = cls[id_of[d.initial]];
  out.transition.assign(static_cast<size_t>(num_classes) * d.num_labels, -1);
  out.final_flags.assign(num_classes, 0);
  for (int i = 0; i < n; ++i) {
    int c = cls[i];
    out.final_flags[c] = d.final_flags[reach[i]];
    for (int l = 0; l < d.num_labels; ++l)
      out.transition[static_cast<size_t>(c) * d.num_labels + l] = cls[id_of[d.step(reach[i], l)]];
  }
  if (d.dead >= 0 && id_of[d.dead] >= 0) out.dead = cls[id_of[d.dead]];
  return out;
}

// ---- reversal and trimming ----

inline Nfa reverse(const Nfa& n) {
  Nfa out;
  out.num_states = n.num_states;
  out.num_labels = n.num_labels;
  out.initials = n.finals;
  out.finals = n.initials;
  out.arrows.reserve(n.arrows.size());
  for (auto& a : n.arrows) out.add_arrow(a.dst, a.label, a.src);
  return out;
}

namespace detail {

inline std::vector<char> reachable_from(const Nfa& n, const std::vector<int>& seeds, bool backwards) {
  std::vector<std::vector<int>> adj(n.num_states);
  for (auto& a : n.arrows) {
    if (backwards)
      adj[a.dst].push_back(a.src);
    else
      adj[a.src].push_back(a.dst);
  }
  std::vector<char> seen(n.num_states, 0);
  std::vector<int> stack;
  for (int s : seeds) {
    if (!seen[s]) {
      seen[s] = 1;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    for (int t : adj[s]) {
      if (!seen[t]) {
        seen[t] = 1;
        stack.push_back(t);
      }
    }
  }
  return seen;
}

}  // namespace detail

/// Keeps exactly the states lying on some accepted path.
inline Nfa trim(const Nfa& n) {
  auto fwd = detail::reachable_from(n, n.initials, false);
  auto bwd = detail::reachable_from(n, n.finals, true);
  std::vector<int> id_of(n.num_states, -1);
  Nfa out;
  out.num_labels = n.num_labels;
  for (int s = 0; s < n.num_states; ++s) {
    if (fwd[s] && bwd[s]) id_of[s] = out.add_state();
  }
  for (auto& a : n.arrows)
    if (id_of[a.src] >= 0 && id_of[a.dst] >= 0) out.add_arrow(id_of[a.src], a.label, id_of[a.dst]);
  for (int s : n.initials)
    if (id_of[s] >= 0) out.initials.push_back(id_of[s]);
  for (int s : n.finals)
    if (id_of[s] >= 0) out.finals.push_back(id_of[s]);
  std::sort(out.arrows.begin(), out.arrows.end());
  out.arrows.erase(std::unique(out.arrows.begin(), out.arrows.end()), out.arrows.end());
  return out;
}

inline bool is_trim(const Nfa& n) {
  auto fwd = detail::reachable_from(n, n.initials, false);
  auto bwd = detail::reachable_from(n, n.finals, true);
  for (int s = 0; s < n.num_states; ++s)
    if (!fwd[s] || !bwd[s]) return false;
  return true;
}

// ---- product ----

/// Accepts the intersection of the two languages; inputs may not contain
/// epsilon arrows and must share a label set.  Only live pairs materialize.
inline Nfa product_intersect(const Nfa& a, const Nfa& b) {
  if (a.num_labels != b.num_labels) throw std::invalid_argument("product of automata over different label sets");
  for (auto& ar : a.arrows)
    if (ar.label == kEpsilon) throw std::invalid_argument("product requires epsilon-free input");
  for (auto& br : b.arrows)
    if (br.label == kEpsilon) throw std::invalid_argument("product requires epsilon-free input");

  std::vector<std::vector<std::pair<int, int>>> a_out(a.num_states), b_out(b.num_states);
  for (auto& ar : a.arrows) a_out[ar.src].emplace_back(ar.label, ar.dst);
  for (auto& br : b.arrows) b_out[br.src].emplace_back(br.label, br.dst);

  std::map<std::pair<int, int>, int> ids;
  std::vector<std::pair<int, int>> states;
  std::vector<int> worklist;
  Nfa out;
  out.num_labels = a.num_labels;
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
  for (int s : a.initials)
    for (int t : b.initials) out.initials.push_back(intern(s, t));
  while (!worklist.empty()) {
    int id = worklist.back();
    worklist.pop_back();
    auto [s, t] = states[id];
    for (auto& [la, sa] : a_out[s])
      for (auto& [lb, tb] : b_out[t])
        if (la == lb) out.add_arrow(id, la, intern(sa, tb));
  }
  for (int id = 0; id < out.num_states; ++id) {
    auto [s, t] = states[id];
    if (a.is_final(s) && b.is_final(t)) out.finals.push_back(id);
  }
  std::sort(out.arrows.begin(), out.arrows.end());
  out.arrows.erase(std::unique(out.arrows.begin(), out.arrows.end()), out.arrows.end());
  return trim(out);
}

// ---- language enumeration (test oracle support) ----

namespace detail {

inline void enumerate_rec(const Nfa& n, const std::vector<std::vector<std::vector<int>>>& step_table,
                          std::vector<int>& word, std::vector<int>& subset, int max_len, std::set<Word>& out) {
  for (int s : subset) {
    if (n.is_final(s)) {
      out.insert(Word(word.begin(), word.end()));
      break;
    }
  }
  if (static_cast<int>(word.size()) == max_len) return;
  for (int l = 0; l < n.num_labels; ++l) {
    std::set<int> targets;
    for (int s : subset)
      for (int t : step_table[s][l]) targets.insert(t);
    if (targets.empty()) continue;
    std::vector<int> next = epsilon_closure(n, std::vector<int>(targets.begin(), targets.end()));
    word.push_back(l);
    enumerate_rec(n, step_table, word, next, max_len, out);
    word.pop_back();
  }
}

}  // namespace detail

/// All accepted words of length at most max_len, by breadth-first path
/// search over subsets.  Intended for small bounds only.
inline std::set<Word> enumerate_language(const Nfa& n, int max_len) {
  std::set<Word> out;
  if (n.num_states == 0) return out;
  std::vector<std::vector<std::vector<int>>> step_table(n.num_states,
                                                        std::vector<std::vector<int>>(n.num_labels));
  for (auto& a : n.arrows)
    if (a.label != kEpsilon) step_table[a.src][a.label].push_back(a.dst);
  std::vector<int> start = epsilon_closure(n, n.initials);
  if (start.empty()) return out;
  std::vector<int> word;
  detail::enumerate_rec(n, step_table, word, start, max_len, out);
  return out;
}

inline bool nfa_accepts(const Nfa& n, std::span<const int> word) {
  std::vector<int> cur = epsilon_closure(n, n.initials);
  std::vector<std::vector<std::vector<int>>> step_table(n.num_states,
                                                        std::vector<std::vector<int>>(n.num_labels));
  for (auto& a : n.arrows)
    if (a.label != kEpsilon) step_table[a.src][a.label].push_back(a.dst);
  for (int x : word) {
    std::set<int> targets;
    for (int s : cur)
      for (int t : step_table[s][x]) targets.insert(t);
    cur = epsilon_closure(n, std::vector<int>(targets.begin(), targets.end()));
    if (cur.empty()) return false;
  }
  for (int s : cur)
    if (n.is_final(s)) return true;
  return false;
}

// ---- canonical form ----

/// Canonical description of a deterministic trim machine: states renumbered
/// breadth-first from the initial state with arrows followed in label order.
/// Two such machines are isomorphic exactly when their canonical forms are
/// equal.
struct CanonicalFsa {
  int num_states = 0;
  std::vector<Nfa::Arrow> arrows;
  std::vector<int> finals;
  auto operator<=>(const CanonicalFsa&) const = default;

  std::string to_string() const {
    std::string s = "n=" + std::to_string(num_states) + ";";
    for (auto& a : arrows)
      s += std::to_string(a.src) + "-" + std::to_string(a.label) + ">" + std::to_string(a.dst) + ";";
    s += "F:";
    for (int f : finals) s += std::to_string(f) + ",";
    return s;
  }
};

inline CanonicalFsa canonical_form(const Nfa& n) {
  if (n.initials.size() != 1) throw std::invalid_argument("canonical_form requires a single initial state");
  std::vector<std::map<int, int>> out(n.num_states);
  for (auto& a : n.arrows) {
    if (a.label == kEpsilon) throw std::invalid_argument("canonical_form requires epsilon-free input");
    auto [it, inserted] = out[a.src].emplace(a.label, a.dst);
    if (!inserted && it->second != a.dst) throw std::invalid_argument("canonical_form requires deterministic input");
  }
  std::vector<int> order(n.num_states, -1);
  std::vector<int> bfs{n.initials[0]};
  order[n.initials[0]] = 0;
  for (size_t i = 0; i < bfs.size(); ++i) {
    int s = bfs[i];
    for (auto& [l, t] : out[s]) {
      if (order[t] < 0) {
        order[t] = static_cast<int>(bfs.size());
        bfs.push_back(t);
      }
    }
  }
  CanonicalFsa c;
  c.num_states = static_cast<int>(bfs.size());
  for (int s : bfs)
    for (auto& [l, t] : out[s])
      if (order[t] >= 0) c.arrows.push_back({order[s], l, order[t]});
  std::sort(c.arrows.begin(), c.arrows.end());
  for (int f : n.finals)
    if (order[f] >= 0) c.finals.push_back(order[f]);
  std::sort(c.finals.begin(), c.finals.end());
  c.finals.erase(std::unique(c.finals.begin(), c.finals.end()), c.finals.end());
  return c;
}

inline CanonicalFsa canonical_form(const Pdfa& p) { return canonical_form(p.to_nfa()); }

/// Canonical form of a complete DFA with the dead sink excluded from the
/// traversal.
inline CanonicalFsa canonical_form(const Dfa& d) {
  Nfa n;
  n.num_states = d.num_states;
  n.num_labels = d.num_labels;
  n.initials = {d.initial};
  for (int s = 0; s < d.num_states; ++s) {
    if (d.final_flags[s]) n.finals.push_back(s);
    for (int l = 0; l < d.num_labels; ++l) {
      int t = d.step(s, l);
      if (s != d.dead && t != d.dead) n.add_arrow(s, l, t);
    }
  }
  return canonical_form(n);
}

}  // namespace kbweld
