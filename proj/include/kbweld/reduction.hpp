#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "kbweld/rules.hpp"
#include "kbweld/words.hpp"

namespace kbweld {

/// Reduces words against the possibly infinite rule set held by a frozen
/// rule automaton.  Three cooperating machines, all built lazily by subset
/// construction over the rule automaton and the pair comparator:
///
///  * a prefix detector read left to right, whose states are subsets of
///    (rule-state, comparator-state) pairs; reaching a final state after a
///    prefix means the prefix ends in some left-hand side,
///  * a suffix locator read right to left over triples (rule-state,
///    pad-count, pad-permitted) that finds the shortest left-hand side
///    ending the prefix, and
///  * a right-hand side walk that replays the located left-hand side
///    forward, recovering the shortlex-least right-hand side from the
///    recorded locator subsets.
///
/// Requires exclusive access during any call (the caches mutate).  Distinct
/// engines over the same automaton may run on different threads.
class ReductionEngine {
 public:
  using LookupFn = std::function<std::optional<Word>(const Word&)>;

  explicit ReductionEngine(const RuleAutomaton& ra) : ra_(&ra) { reset_caches(); }

  const RuleAutomaton& automaton() const { return *ra_; }

  /// Discards every cached subset and arrow; subsequent queries rebuild
  /// lazily.  Caches are pure memoization, so results are unaffected.
  void reset_caches() {
    p_subsets_.clear();
    p_ids_.clear();
    p_arrows_.clear();
    q_subsets_.clear();
    q_ids_.clear();
    q_arrows_.clear();
    q_final_delta_.clear();
    p_final_ = p_intern({});  // the empty subset stands for "final seen"
    p_init_ = p_intern({p_pack(ra_->start, kCmpStart)});
    q_init_ = q_intern({q_pack(ra_->start, 0, true)});
  }

  int p_initial() const { return p_init_; }
  bool p_is_final(int pstate) const { return pstate == p_final_; }
  size_t p_cache_size() const { return p_subsets_.size(); }
  size_t q_cache_size() const { return q_subsets_.size(); }

  const std::vector<int>& p_subset(int pstate) const { return p_subsets_[pstate]; }

  /// One transition of the prefix detector.  The product's initial pair is
  /// implicitly closed under (x, x) self-loops, so it survives every step.
  int p_step(int pstate, Letter x) {
    if (pstate == p_final_) throw std::logic_error("prefix detector stepped from a final state");
    int64_t key = arrow_key(pstate, x);
    auto hit = p_arrows_.find(key);
    if (hit != p_arrows_.end()) return hit->second;

    const Alphabet& a = ra_->alphabet;
    std::vector<int> next;
    next.push_back(p_pack(ra_->start, kCmpStart));
    bool final_seen = false;
    for (int code : p_subsets_[pstate]) {
      int s = code / kCmpNumStates;
      int t = code % kCmpNumStates;
      for (auto& [lbl, s2] : ra_->fwd_range(s, x)) {
        int t2 = comparator_step(t, x, a.pair_right(lbl), a.pad());
        if (t2 < 0) continue;
        if (s2 == ra_->start && t2 == kCmpLess) continue;  // omitted product state
        if (s2 == ra_->start && comparator_final(t2)) {
          final_seen = true;
          break;
        }
        next.push_back(p_pack(s2, t2));
      }
      if (final_seen) break;
    }
    int target;
    if (final_seen) {
      target = p_final_;
    } else {
      std::sort(next.begin(), next.end());
      next.erase(std::unique(next.begin(), next.end()), next.end());
      // (s, less-than) is subsumed by (s, greater-than): anything accepted
      // from the former is accepted from the latter
      std::vector<int> pruned;
      pruned.reserve(next.size());
      for (int code : next) {
        if (code % kCmpNumStates == kCmpLess &&
            std::binary_search(next.begin(), next.end(), code - kCmpLess + kCmpGreater))
          continue;
        pruned.push_back(code);
      }
      target = p_intern(std::move(pruned));
    }
    p_arrows_.emplace(key, target);
    return target;
  }

  /// Least m such that the length-m prefix of w ends in a left-hand side;
  /// nothing if w is irreducible.
  std::optional<int> find_reducible_prefix(std::span<const Letter> w) {
    check_letters(w);
    int cur = p_init_;
    for (size_t i = 0; i < w.size(); ++i) {
      cur = p_step(cur, w[i]);
      if (cur == p_final_) return static_cast<int>(i) + 1;
    }
    return std::nullopt;
  }

  struct LhsResult {
    int start = 0;                 // offset of the located left-hand side in u
    int delta = 0;                 // |lhs| - |rhs| for the rule family found
    std::vector<int> q_state_at;   // locator state after reading u[k..n), indexed by k
  };

  /// Reads u right to left through the suffix locator and returns the start
  /// of the shortest suffix of u that is a left-hand side.  Preconditions
  /// (established by the prefix detector): u has such a suffix and no proper
  /// prefix of u has one.
  LhsResult find_lhs(std::span<const Letter> u) {
    check_letters(u);
    int n = static_cast<int>(u.size());
    LhsResult res;
    res.q_state_at.assign(n + 1, -1);
    int cur = q_init_;
    int k = n;
    res.q_state_at[k] = cur;
    for (;;) {
      if (q_final_delta_[cur] >= 0) {
        res.start = k;
        res.delta = q_final_delta_[cur];
        return res;
      }
      if (k == 0) throw std::logic_error("suffix locator exhausted its input");
      cur = q_step(cur, u[k - 1]);
      --k;
      res.q_state_at[k] = cur;
    }
  }

  /// Replays lambda forward, choosing at each step the least letter z that
  /// both extends a path in the rule automaton and matches a recorded
  /// locator triple.  Returns the shortlex-least rhs with (lambda, rhs)
  /// accepted.
  Word find_rhs(std::span<const Letter> lambda, const LhsResult& res) {
    const Alphabet& a = ra_->alphabet;
    int m = static_cast<int>(lambda.size());
    int delta = res.delta;
    Word rho;
    int cur_s = ra_->start;
    int cur_i = delta;
    for (int k = 0; m - k > delta; ++k) {
      Letter y = lambda[k];
      bool found = false;
      for (Letter z = 0; z < a.size() && !found; ++z) {
        if (k == 0 && delta == 0 && y <= z) continue;
        if (k == 0 && delta > 0 && y == z) continue;
        auto s_next = ra_->fwd_step(cur_s, a.pair_label(y, z));
        if (!s_next) continue;
        const auto& sub = q_subsets_[res.q_state_at[res.start + k + 1]];
        auto lo = std::lower_bound(sub.begin(), sub.end(), *s_next * 6);
        if (lo == sub.end() || *lo / 6 != *s_next) continue;
        int ti = (*lo % 6) / 2;
        if (ti != cur_i) continue;  // the locator arrow must land on the current triple
        if (cur_s == ra_->start && !(ti == 0 ? y > z : y != z)) continue;
        rho.push_back(z);
        cur_s = *s_next;
        found = true;
      }
      if (!found) throw std::logic_error("right-hand side recovery found no continuation");
    }
    return rho;
  }

  /// Full reduction: repeatedly locate the leftmost-shortest left-hand side,
  /// substitute the corresponding right-hand side (preferring an exact store
  /// hit supplied by `lookup`), and resume from the splice point using the
  /// history stack.  Returns the irreducible word plus every rule recovered
  /// from the automaton that the lookup did not know.
  std::pair<Word, std::vector<Rule>> reduce(Word w, const LookupFn& lookup = {}) {
    check_letters(w);
    std::vector<Rule> discovered;
    std::map<Word, Word> discovered_rhs;
    std::vector<int> hist{p_init_};
    size_t pos = 0;
    while (pos < w.size()) {
      int p = p_step(hist.back(), w[pos]);
      hist.push_back(p);
      ++pos;
      if (p != p_final_) continue;
      size_t m = pos;
      LhsResult res = find_lhs(std::span<const Letter>(w.data(), m));
      size_t k0 = static_cast<size_t>(res.start);
      Word lambda = subword(w, k0, m);
      std::optional<Word> rho;
      if (lookup) rho = lookup(lambda);
      auto it = discovered_rhs.find(lambda);
      if (it != discovered_rhs.end() && (!rho || shortlex_less(it->second, *rho))) rho = it->second;
      if (!rho) {
        rho = find_rhs(lambda, res);
        discovered.push_back({lambda, *rho});
        discovered_rhs.emplace(lambda, *rho);
      }
      Word next;
      next.reserve(k0 + rho->size() + (w.size() - m));
      next.insert(next.end(), w.begin(), w.begin() + k0);
      next.insert(next.end(), rho->begin(), rho->end());
      next.insert(next.end(), w.begin() + m, w.end());
      w = std::move(next);
      hist.resize(k0 + 1);
      pos = k0;
    }
    return {std::move(w), std::move(discovered)};
  }

  Word reduce_word(const Word& w, const LookupFn& lookup = {}) { return reduce(w, lookup).first; }

 private:
  void check_letters(std::span<const Letter> w) const {
    for (Letter x : w)
      if (x < 0 || x >= ra_->alphabet.size()) throw std::invalid_argument("letter outside the alphabet");
  }

  int p_pack(int s, int t) const { return s * kCmpNumStates + t; }
  static int q_pack(int s, int i, bool pad_ok) { return s * 6 + i * 2 + (pad_ok ? 1 : 0); }

  int64_t arrow_key(int state, Letter x) const {
    return static_cast<int64_t>(state) * ra_->alphabet.size() + x;
  }

  int p_intern(std::vector<int> subset) {
    auto it = p_ids_.find(subset);
    if (it != p_ids_.end()) return it->second;
    int id = static_cast<int>(p_subsets_.size());
    p_ids_.emplace(subset, id);
    p_subsets_.push_back(std::move(subset));
    return id;
  }

  int q_intern(std::vector<int> subset) {
    auto it = q_ids_.find(subset);
    if (it != q_ids_.end()) return it->second;
    int id = static_cast<int>(q_subsets_.size());
    q_ids_.emplace(subset, id);
    int delta = -1;
    if (subset.size() == 1) {
      int code = subset[0];
      if (code / 6 == ra_->start && (code % 2) == 0) delta = (code % 6) / 2;
    }
    q_final_delta_.push_back(delta);
    q_subsets_.push_back(std::move(subset));
    return id;
  }

  /// One transition of the suffix locator, with two language-preserving
  /// prunings: a reached final collapses the subset to the final with the
  /// most padding columns, and per rule-state only the triple with the
  /// largest pad count is kept.
  int q_step(int qid, Letter x) {
    int64_t key = arrow_key(qid, x);
    auto hit = q_arrows_.find(key);
    if (hit != q_arrows_.end()) return hit->second;

    const Alphabet& a = ra_->alphabet;
    int s0 = ra_->start;
    std::vector<int> raw;
    for (int code : q_subsets_[qid]) {
      int s = code / 6;
      int i = (code % 6) / 2;
      bool pad_ok = code & 1;
      // padded extension (x, pad): only from the locator's initial state or
      // after exactly one padding column
      bool from_init = (s == s0 && i == 0 && pad_ok);
      if (from_init || (i == 1 && pad_ok)) {
        if (auto t = ra_->bwd_step(s, a.pair_label(x, a.pad()))) {
          if (from_init)
            raw.push_back(*t == s0 ? q_pack(s0, 1, false) : q_pack(*t, 1, true));
          else
            raw.push_back(q_pack(*t, 2, false));
        }
      }
      // unpadded extensions (x, y): arrows into s with left letter x
      for (auto& [lbl, src] : ra_->bwd_range(s, x)) {
        Letter y = a.pair_right(lbl);
        if (y == a.pad()) continue;
        if (src == s0 && !(i == 0 ? x > y : x != y)) continue;
        raw.push_back(q_pack(src, i, false));
      }
    }
    if (raw.empty()) throw std::logic_error("suffix locator reached an empty subset");
    std::sort(raw.begin(), raw.end());
    raw.erase(std::unique(raw.begin(), raw.end()), raw.end());

    int best_final = -1;
    for (int code : raw) {
      if (code / 6 == s0 && (code % 2) == 0) best_final = std::max(best_final, (code % 6) / 2);
    }
    std::vector<int> next;
    if (best_final >= 0) {
      next.push_back(q_pack(s0, best_final, false));
    } else {
      // codes sort by (state, pad count, pad flag); keep the last per state
      for (size_t i = 0; i < raw.size(); ++i) {
        if (i + 1 < raw.size() && raw[i + 1] / 6 == raw[i] / 6) continue;
        next.push_back(raw[i]);
      }
    }
    int target = q_intern(std::move(next));
    q_arrows_.emplace(key, target);
    return target;
  }

  const RuleAutomaton* ra_;

  std::vector<std::vector<int>> p_subsets_;
  std::map<std::vector<int>, int> p_ids_;
  std::unordered_map<int64_t, int> p_arrows_;
  int p_init_ = 0;
  int p_final_ = 0;

  std::vector<std::vector<int>> q_subsets_;
  std::map<std::vector<int>, int> q_ids_;
  std::unordered_map<int64_t, int> q_arrows_;
  std::vector<int> q_final_delta_;
  int q_init_ = 0;
};

}  // namespace kbweld
