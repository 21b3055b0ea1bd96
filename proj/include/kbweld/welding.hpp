#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "kbweld/fsa.hpp"

namespace kbweld {

/// Mutable automaton kept partially deterministic in both directions at all
/// times: each (state, label) slot holds at most one forward target and one
/// backward source.  Conflicting arrows are recorded as pending state
/// coincidences instead, and process() drains the queue with union-find,
/// merging arrow tables incrementally.  This is the coincidence procedure
/// driving every weld.
class WeldGraph {
 public:
  struct Stats {
    long states_added = 0;
    long arrows_added = 0;
    long merges = 0;
  };

  explicit WeldGraph(int num_labels) : num_labels_(num_labels) {}

  int num_labels() const { return num_labels_; }

  int add_state() {
    fwd_.emplace_back();
    bwd_.emplace_back();
    parent_.push_back(static_cast<int>(parent_.size()));
    dead_.push_back(0);
    ++stats_.states_added;
    return static_cast<int>(parent_.size()) - 1;
  }

  int find(int s) const {
    while (parent_[s] != s) {
      parent_[s] = parent_[parent_[s]];
      s = parent_[s];
    }
    return s;
  }

  bool is_live(int s) const { return parent_[s] == s && !dead_[s]; }

  void add_arrow(int s, int label, int t) { add_arrow_impl(s, label, t, true); }

  void remove_arrow(int s, int label) {
    s = find(s);
    auto it = fwd_[s].find(label);
    if (it == fwd_[s].end()) return;
    int t = find(it->second);
    fwd_[s].erase(it);
    auto ib = bwd_[t].find(label);
    if (ib != bwd_[t].end() && find(ib->second) == s) bwd_[t].erase(ib);
  }

  std::optional<int> fwd_step(int s, int label) const {
    s = find(s);
    auto it = fwd_[s].find(label);
    if (it == fwd_[s].end()) return std::nullopt;
    return find(it->second);
  }

  std::optional<int> bwd_step(int s, int label) const {
    s = find(s);
    auto it = bwd_[s].find(label);
    if (it == bwd_[s].end()) return std::nullopt;
    return find(it->second);
  }

  const std::map<int, int>& fwd_row(int s) const { return fwd_[find(s)]; }
  const std::map<int, int>& bwd_row(int s) const { return bwd_[find(s)]; }

  void join(int a, int b) { pending_.emplace_back(a, b); }

  bool has_pending() const { return !pending_.empty(); }

  /// Drains the coincidence queue.  on_merge(keep, drop) fires before the
  /// arrow tables are spliced so the callee can reconcile any per-state data
  /// it maintains.  An optional RNG shuffles the processing order; the
  /// result is independent of it.
  void process(const std::function<void(int, int)>& on_merge = {}, std::mt19937* rng = nullptr) {
    while (!pending_.empty()) {
      size_t pick = 0;
      if (rng) pick = (*rng)() % pending_.size();
      auto [a, b] = pending_[pick];
      pending_[pick] = pending_.back();
      pending_.pop_back();
      a = find(a);
      b = find(b);
      if (a == b) continue;
      int keep = a, drop = b;
      if (fwd_[keep].size() + bwd_[keep].size() < fwd_[drop].size() + bwd_[drop].size()) std::swap(keep, drop);
      if (on_merge) on_merge(keep, drop);
      parent_[drop] = keep;
      ++stats_.merges;
      auto f = std::move(fwd_[drop]);
      fwd_[drop].clear();
      auto b_in = std::move(bwd_[drop]);
      bwd_[drop].clear();
      for (auto& [l, t] : f) add_arrow_impl(keep, l, t, false);
      for (auto& [l, s] : b_in) add_arrow_impl(s, l, keep, false);
    }
  }

  std::vector<int> live_states() const {
    std::vector<int> out;
    for (int s = 0; s < static_cast<int>(parent_.size()); ++s)
      if (is_live(s)) out.push_back(s);
    return out;
  }

  size_t num_live_states() const { return live_states().size(); }

  size_t num_arrows() const {
    size_t n = 0;
    for (int s : live_states()) n += fwd_[s].size();
    return n;
  }

  const Stats& stats() const { return stats_; }

  /// Drops a live state and every arrow touching it.  Only valid with an
  /// empty pending queue.
  void erase_state(int s) {
    s = find(s);
    std::vector<int> labels;
    for (auto& [l, t] : fwd_[s]) labels.push_back(l);
    for (int l : labels) remove_arrow(s, l);
    std::vector<std::pair<int, int>> in;
    for (auto& [l, src] : bwd_[s]) in.emplace_back(find(src), l);
    for (auto& [src, l] : in) remove_arrow(src, l);
    dead_[s] = 1;
  }

 private:
  // Adds the arrow or records the coincidence it implies.  The backward
  // slot of the retained arrow is always reconciled: during merges the
  // moved-out tables leave it temporarily missing or stale.
  void add_arrow_impl(int s, int label, int t, bool count) {
    s = find(s);
    t = find(t);
    auto it = fwd_[s].find(label);
    int kept_target = t;
    if (it != fwd_[s].end()) {
      int t2 = find(it->second);
      it->second = t2;
      if (t2 != t) pending_.emplace_back(t, t2);
      kept_target = t2;
    } else {
      fwd_[s][label] = t;
      if (count) ++stats_.arrows_added;
    }
    auto ib = bwd_[kept_target].find(label);
    if (ib != bwd_[kept_target].end()) {
      int s2 = find(ib->second);
      ib->second = s2;
      if (s2 != s) pending_.emplace_back(s, s2);
    } else {
      bwd_[kept_target][label] = s;
    }
  }

  int num_labels_;
  std::vector<std::map<int, int>> fwd_, bwd_;
  mutable std::vector<int> parent_;
  std::vector<char> dead_;
  std::vector<std::pair<int, int>> pending_;
  Stats stats_;
};

// ---- the weld operation on plain automata ----

inline bool is_welded(const Nfa& n) {
  if (n.initials.size() != 1 || n.finals.size() != 1) return false;
  std::set<std::pair<int, int>> out, in;
  for (auto& a : n.arrows) {
    if (a.label == kEpsilon) return false;
    if (!out.emplace(a.src, a.label).second) return false;
    if (!in.emplace(a.dst, a.label).second) return false;
  }
  return true;
}

/// Collapses a trim non-empty automaton to its largest welded quotient: all
/// initial states are identified, all final states are identified, and
/// sources/targets of equally labelled arrows are identified until the
/// machine is deterministic in both directions.  The result depends only on
/// the accepted language.
inline Pdfa weld(const Nfa& n, std::mt19937* rng = nullptr) {
  if (n.num_states == 0 || n.initials.empty() || n.finals.empty())
    throw std::invalid_argument("weld requires a non-empty automaton");
  if (!is_trim(n)) throw std::invalid_argument("weld requires a trim automaton");

  WeldGraph g(n.num_labels);
  for (int s = 0; s < n.num_states; ++s) g.add_state();
  for (size_t i = 1; i < n.initials.size(); ++i) g.join(n.initials[0], n.initials[i]);
  for (size_t i = 1; i < n.finals.size(); ++i) g.join(n.finals[0], n.finals[i]);
  for (auto& a : n.arrows) {
    if (a.label == kEpsilon)
      g.join(a.src, a.dst);
    else
      g.add_arrow(a.src, a.label, a.dst);
  }
  g.process({}, rng);

  std::vector<int> live = g.live_states();
  std::vector<int> id_of(n.num_states, -1);
  for (size_t i = 0; i < live.size(); ++i) id_of[live[i]] = static_cast<int>(i);
  Pdfa p;
  p.num_states = static_cast<int>(live.size());
  p.num_labels = n.num_labels;
  p.out.resize(p.num_states);
  p.initial = id_of[g.find(n.initials[0])];
  p.finals = {id_of[g.find(n.finals[0])]};
  for (size_t i = 0; i < live.size(); ++i) {
    for (auto& [l, t] : g.fwd_row(live[i])) p.out[i].emplace_back(l, id_of[g.find(t)]);
    std::sort(p.out[i].begin(), p.out[i].end());
  }
  return p;
}

}  // namespace kbweld
