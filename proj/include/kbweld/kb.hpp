#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "kbweld/reduction.hpp"
#include "kbweld/rules.hpp"
#include "kbweld/words.hpp"

namespace kbweld {

enum class StoreList : int { kConsidered = 0, kThis = 1, kNew = 2, kDelete = 3, kNone = 4 };

/// The finite rule set, partitioned into the four working lists.  Lookup by
/// left-hand side, insertion and deletion are all map-backed; iteration is
/// snapshot-based and tolerates concurrent insertions and removals (rules
/// added mid-iteration may be missed, which is fine for every caller).
/// Deleted rules are tombstoned so that re-insertion attempts can be
/// detected: the completion procedure guarantees they never happen.
class Store {
 public:
  struct Entry {
    Rule rule;
    bool minimal = false;    // this pass: known output of minimization
    bool minimized = false;  // this pass: has been through minimization
    bool priority = false;
    StoreList where = StoreList::kNone;
    bool dead = false;
    std::list<Entry*>::iterator self;
  };
  using Handle = Entry*;

  Handle insert(const Rule& r, StoreList list, bool front, bool priority) {
    arena_.push_back(std::make_unique<Entry>());
    Handle h = arena_.back().get();
    h->rule = r;
    h->priority = priority;
    attach(h, list, front);
    by_lhs_[r.lhs].push_back(h);
    ++count_;
    return h;
  }

  void move_to(Handle h, StoreList list, bool front) {
    detach(h);
    attach(h, list, front);
  }

  void erase(Handle h) {
    detach(h);
    h->dead = true;
    tombstones_.emplace(h->rule.lhs, h->rule.rhs);
    auto it = by_lhs_.find(h->rule.lhs);
    if (it != by_lhs_.end()) {
      std::erase(it->second, h);
      if (it->second.empty()) by_lhs_.erase(it);
    }
    --count_;
  }

  Handle find_exact(const Rule& r) const {
    auto it = by_lhs_.find(r.lhs);
    if (it == by_lhs_.end()) return nullptr;
    for (Handle h : it->second)
      if (!h->dead && h->rule.rhs == r.rhs) return h;
    return nullptr;
  }

  bool contains(const Rule& r) const { return find_exact(r) != nullptr; }

  /// Shortlex-least right-hand side stored for this exact left-hand side,
  /// across all four lists.
  std::optional<Word> best_rhs(const Word& lhs) const {
    auto it = by_lhs_.find(lhs);
    if (it == by_lhs_.end()) return std::nullopt;
    const Word* best = nullptr;
    for (Handle h : it->second) {
      if (h->dead) continue;
      if (!best || shortlex_less(h->rule.rhs, *best)) best = &h->rule.rhs;
    }
    if (!best) return std::nullopt;
    return *best;
  }

  bool tombstoned(const Rule& r) const { return tombstones_.count({r.lhs, r.rhs}) != 0; }

  std::vector<Handle> snapshot(StoreList list) const {
    const auto& lst = lists_[static_cast<int>(list)];
    return std::vector<Handle>(lst.begin(), lst.end());
  }

  Handle front(StoreList list) const {
    const auto& lst = lists_[static_cast<int>(list)];
    return lst.empty() ? nullptr : lst.front();
  }

  size_t size() const { return count_; }
  size_t size(StoreList list) const { return lists_[static_cast<int>(list)].size(); }

  /// Is some stored left-hand side a substring of w?  Delete-list rules are
  /// excluded unless asked for.
  bool reduces(const Word& w, bool include_delete = false) const {
    for (int i = 0; i < 4; ++i) {
      if (!include_delete && i == static_cast<int>(StoreList::kDelete)) continue;
      for (Handle h : lists_[i]) {
        const Word& l = h->rule.lhs;
        if (l.empty() || l.size() > w.size()) continue;
        if (std::search(w.begin(), w.end(), l.begin(), l.end()) != w.end()) return true;
      }
    }
    return false;
  }

  template <class Fn>
  void for_each(Fn fn) const {
    for (int i = 0; i < 4; ++i)
      for (Handle h : lists_[i]) fn(h);
  }

 private:
  void attach(Handle h, StoreList list, bool front) {
    auto& lst = lists_[static_cast<int>(list)];
    h->self = front ? lst.insert(lst.begin(), h) : lst.insert(lst.end(), h);
    h->where = list;
  }

  void detach(Handle h) {
    if (h->where != StoreList::kNone) lists_[static_cast<int>(h->where)].erase(h->self);
    h->where = StoreList::kNone;
  }

  std::vector<std::unique_ptr<Entry>> arena_;
  std::array<std::list<Handle>, 4> lists_;
  std::map<Word, std::vector<Handle>> by_lhs_;
  std::set<std::pair<Word, Word>> tombstones_;
  size_t count_ = 0;
};

struct KbLimits {
  int max_passes = 1000;
  size_t max_wdiff_states = 1'000'000;
  size_t max_rules = 1'000'000;
  // abort the pass when wdiff growth since its start exceeds this fraction
  // of the starting size (states + arrows), with an absolute floor
  double abort_growth_ratio = 0.25;
  long abort_growth_floor = 64;
  bool enable_abort = true;
};

struct PassReport {
  int pass = 0;
  size_t store_rules = 0;
  size_t wdiff_states = 0;
  size_t new_found = 0;
  bool aborted = false;
  bool stable = false;

  std::string line() const {
    return "pass " + std::to_string(pass) + " rules=" + std::to_string(store_rules) +
           " wdiff_states=" + std::to_string(wdiff_states) + " new=" + std::to_string(new_found) +
           " aborted=" + (aborted ? std::string("true") : std::string("false")) +
           " stable=" + (stable ? std::string("true") : std::string("false"));
  }
};

struct KbStats {
  long resurrection_violations = 0;  // insertions that hit a tombstone
  long monotonicity_violations = 0;  // sampled words that stopped being store-reducible
  long oversized_new_rules = 0;      // minimization side products not smaller than their input
  long aborts = 0;
};

enum class RunStatus { kStabilized, kPassLimit, kStateLimit, kRuleLimit };

struct RunResult {
  RunStatus status = RunStatus::kPassLimit;
  RuleAutomaton rules;
  int passes = 0;
  std::vector<PassReport> reports;
  KbStats stats;
  bool stabilized() const { return status == RunStatus::kStabilized; }
};

struct MinimizeResult {
  Rule rule;
  bool proper_substring_reduced = false;
};

/// The completion driver: owns the store, the evolving word-difference
/// automaton, the frozen rule automaton of the current pass and its
/// reduction engine, and runs Knuth-Bendix passes until the automaton stops
/// changing or a limit trips.
class KbDriver {
 public:
  explicit KbDriver(const Presentation& p, const KbLimits& limits = {})
      : alphabet_(p.alphabet), wdiff_(alphabet_), limits_(limits) {
    if (!alphabet_.inverse_closed()) throw std::invalid_argument("alphabet is not inverse-closed");
    std::vector<Rule> seeds;
    auto push_seed = [&seeds](const Rule& r) {
      if (std::find(seeds.begin(), seeds.end(), r) == seeds.end()) seeds.push_back(r);
    };
    for (Letter x = 0; x < alphabet_.size(); ++x)
      push_seed(Rule{Word{x, alphabet_.inverse(x)}, Word{}});
    for (const Word& rel : p.relators) {
      if (auto r = relator_to_rule(rel, alphabet_)) {
        if (!is_admissible_rule_pair(r->lhs, r->rhs)) throw std::logic_error("relator produced a malformed rule");
        push_seed(*r);
      }
    }
    auto fr = [this](const Word& w) { return free_reduce(w, alphabet_); };
    for (const Rule& r : seeds) {
      wdiff_.add_rule_path(r, fr, true);
      store_.insert(r, StoreList::kThis, false, false);
    }
    wdiff_.settle();
    stabilize_wdiff_labels();
    rules_ = wdiff_.freeze();
    engine_ = std::make_unique<ReductionEngine>(rules_);
  }

  /// A driver with no seed rules at all, over the given alphabet.  Useful
  /// when exercising the minimization routine in isolation.
  static KbDriver bare(const Alphabet& a) { return KbDriver(Presentation{a, {}}, Tag{}); }

  const Alphabet& alphabet() const { return alphabet_; }
  const Store& store() const { return store_; }
  Store& store() { return store_; }
  const RuleAutomaton& rules() const { return rules_; }
  const WordDiffAutomaton& wdiff() const { return wdiff_; }
  WordDiffAutomaton& wdiff() { return wdiff_; }
  ReductionEngine& engine() { return *engine_; }
  const KbStats& stats() const { return stats_; }
  int pass_no() const { return pass_no_; }

  /// R-reduction with store preference: right-hand sides come from the
  /// store when the located left-hand side is known there, otherwise from
  /// the automaton walk, in which case the recovered rule goes to New.
  Word reduce(const Word& w) {
    auto [out, discovered] =
        engine_->reduce(w, [this](const Word& lhs) { return store_.best_rhs(lhs); });
    for (const Rule& r : discovered) note_discovered(r);
    return out;
  }

  /// The minimization routine.  Trims reducible proper prefixes/suffixes of
  /// the left side, rebalances overlong rules by moving inverted letters
  /// across, cancels common end letters, reduces the right side, and loops
  /// until nothing changes.  Returns (empty, empty) for redundant rules.
  MinimizeResult minimize_rule(const Rule& in) {
    Word u = in.lhs;
    Word v = in.rhs;
    bool proper_reduced = false;
    const Word original_u = u;

    bool skip_suffix = false;
    if (!u.empty()) {
      Word prefix = subword(u, 0, u.size() - 1);
      Word red = reduce(prefix);
      if (red != prefix) {
        red.push_back(u.back());
        u = std::move(red);
        proper_reduced = true;
        skip_suffix = true;  // straight to the whole-word reduction
      }
    }
    if (!skip_suffix && !u.empty()) {
      Word suffix = subword(u, 1, u.size());
      Word red = reduce(suffix);
      if (red != suffix) proper_reduced = true;
      Word nu{u.front()};
      nu.insert(nu.end(), red.begin(), red.end());
      u = std::move(nu);
    }
    if (u != original_u) u = reduce(u);

    for (int guard = 0;; ++guard) {
      if (guard > 100000) throw std::logic_error("minimization failed to terminate");
      while (u.size() > v.size() + 2 ||
             (u.size() == v.size() + 2 && !v.empty() && u.front() > v.front())) {
        v.push_back(alphabet_.inverse(u.back()));
        u.pop_back();
      }
      const Rule snapshot{u, v};
      if (u.size() == v.size() + 2 && u[1] > alphabet_.inverse(u[0])) {
        Word nv{alphabet_.inverse(u[0])};
        nv.insert(nv.end(), v.begin(), v.end());
        v = std::move(nv);
        u.erase(u.begin());
      }
      while (!u.empty() && !v.empty() && u.front() == v.front()) {
        u.erase(u.begin());
        v.erase(v.begin());
      }
      while (!u.empty() && !v.empty() && u.back() == v.back()) {
        u.pop_back();
        v.pop_back();
      }
      v = reduce(v);
      if (shortlex_less(u, v)) std::swap(u, v);
      if (Rule{u, v} == snapshot) break;
    }
    return {Rule{std::move(u), std::move(v)}, proper_reduced};
  }

  /// Splices one minimal rule into the word-difference automaton: read the
  /// padded rule forward from the start state and backward into it as far
  /// as existing arrows allow; if the frontiers meet at distinct states,
  /// join them and weld, otherwise fill the gap with labelled states whose
  /// labels are the reduced word differences.  Marks everything touched as
  /// needed.  Returns whether the automaton gained states or arrows.
  bool sew(const Rule& r) {
    auto before = wdiff_.stats();
    PaddedPair pp = pad(r.lhs, r.rhs, alphabet_);
    int n = static_cast<int>(pp.size());
    std::vector<int> lbl(n);
    for (int i = 0; i < n; ++i) lbl[i] = alphabet_.pair_label(pp[i].first, pp[i].second);

    int cur = wdiff_.start();
    wdiff_.mark_state_needed(cur);
    int k = 0;
    while (k < n) {
      auto t = wdiff_.fwd_step(cur, lbl[k]);
      if (!t) break;
      wdiff_.mark_arrow_needed(cur, lbl[k]);
      wdiff_.mark_state_needed(*t);
      cur = *t;
      ++k;
    }
    if (k == n) {
      if (wdiff_.canonical(cur) != wdiff_.start()) {
        wdiff_.join(cur, wdiff_.start());
        wdiff_.settle();
      }
      return grew(before);
    }

    int back = wdiff_.start();
    int rr = n;
    while (rr > k) {
      auto src = wdiff_.bwd_step(back, lbl[rr - 1]);
      if (!src) break;
      wdiff_.mark_arrow_needed(*src, lbl[rr - 1]);
      wdiff_.mark_state_needed(*src);
      back = *src;
      --rr;
    }

    while (k < rr) {
      if (auto ex = wdiff_.fwd_step(cur, lbl[k])) {
        wdiff_.mark_arrow_needed(cur, lbl[k]);
        wdiff_.mark_state_needed(*ex);
        cur = *ex;
        ++k;
        continue;
      }
      Word diff{alphabet_.inverse(pp[k].first)};
      diff = concat(diff, wdiff_.label(cur));
      if (pp[k].second != alphabet_.pad()) diff.push_back(pp[k].second);
      diff = reduce(diff);
      int next;
      if (auto existing = wdiff_.state_with_label(diff)) {
        next = *existing;
      } else {
        next = wdiff_.new_state(diff, true);
      }
      wdiff_.add_arrow(cur, lbl[k], next);
      wdiff_.mark_arrow_needed(cur, lbl[k]);
      wdiff_.mark_state_needed(next);
      if (wdiff_.has_pending()) wdiff_.settle();
      cur = next;
      ++k;
    }
    if (wdiff_.canonical(cur) != wdiff_.canonical(back)) wdiff_.join(cur, back);
    wdiff_.settle();
    return grew(before);
  }

  /// Routes one minimization outcome: mark flags, sew a non-trivial output,
  /// place it in This (or mark an existing copy minimal), and dispose of the
  /// original:  deleted outright if a proper substring of its left side was
  /// reducible, parked in Delete otherwise so its right-hand side stays
  /// available for lookups until the next pass.
  void handle_output(Store::Handle h, const MinimizeResult& mr) {
    const Rule original = h->rule;
    bool was_priority = h->priority;
    h->minimized = true;
    bool trivial = mr.rule.trivial();
    bool grew_now = false;
    if (!trivial) grew_now = sew(mr.rule);
    bool output_priority = was_priority || grew_now;

    if (mr.rule == original) {
      h->minimal = true;
      if (output_priority) h->priority = true;
      if (h->where == StoreList::kNew) store_.move_to(h, StoreList::kThis, h->priority);
      return;
    }
    if (!trivial) {
      if (Store::Handle copy = store_.find_exact(mr.rule)) {
        copy->minimal = true;
        if (output_priority) copy->priority = true;
      } else {
        Store::Handle nh = insert_rule(mr.rule, StoreList::kThis, output_priority, output_priority);
        if (nh) nh->minimal = true;
      }
    }
    if (mr.proper_substring_reduced) {
      store_.erase(h);
    } else {
      store_.move_to(h, StoreList::kDelete, false);
    }
  }

  void process_store_rule(Store::Handle h) {
    unit_active_ = true;
    unit_growth_baseline_ = growth_counter();
    unit_input_ = h->rule;
    MinimizeResult mr = minimize_rule(h->rule);
    handle_output(h, mr);
    unit_active_ = false;
  }

  /// Critical pairs from overlaps between the two left-hand sides, already
  /// R-reduced, oriented, and filtered against the store.  Both directions
  /// are examined; a rule against itself only admits proper overlaps.
  std::vector<Rule> overlap_consequences(const Rule& r1, const Rule& r2) {
    std::vector<Rule> out;
    const bool same = (r1 == r2);
    auto one_direction = [&](const Rule& a, const Rule& b) {
      const Word& la = a.lhs;
      const Word& lb = b.lhs;
      size_t max_len = std::min(la.size(), lb.size());
      for (size_t len = 1; len <= max_len; ++len) {
        if (same && len == la.size()) continue;
        if (!std::equal(la.end() - len, la.end(), lb.begin())) continue;
        Word left = concat(a.rhs, subword(lb, len, lb.size()));
        Word right = concat(subword(la, 0, la.size() - len), b.rhs);
        Word x = reduce(left);
        Word y = reduce(right);
        if (x == y) continue;
        if (shortlex_less(x, y)) std::swap(x, y);
        Rule nr{std::move(x), std::move(y)};
        if (!store_.contains(nr) && std::find(out.begin(), out.end(), nr) == out.end()) out.push_back(nr);
      }
    };
    one_direction(r1, r2);
    if (!same) one_direction(r2, r1);
    return out;
  }

  /// End of pass: prune unneeded parts of the word-difference automaton,
  /// reduce state labels against the rules it now holds (merging states
  /// whose labels coincide) until stable, freeze the result as the next
  /// pass's rule automaton, and report whether it is canonically equal to
  /// the previous one.
  bool finalize_pass() {
    wdiff_.prune_unneeded();
    stabilize_wdiff_labels();
    RuleAutomaton next = wdiff_.freeze();
    bool same = next.canonical() == rules_.canonical();
    rules_ = std::move(next);
    engine_ = std::make_unique<ReductionEngine>(rules_);
    wdiff_.clear_needed();
    return same;
  }

  /// One Knuth-Bendix pass: drop the Delete list, re-minimize Considered,
  /// drain New through minimization (with the abort check before each
  /// rule), drain This through critical-pair analysis against Considered
  /// (and This too for priority rules), then rebuild the rule automaton
  /// from the word-difference automaton.
  PassReport kb_pass() {
    ++pass_no_;
    // a pass that starts with pending This rules (the seed pass, or a
    // restart after an abort) cannot witness a fixed point: their overlaps
    // are not yet reflected in the automaton
    bool had_this = store_.size(StoreList::kThis) > 0;
    store_.for_each([](Store::Handle h) {
      h->minimal = false;
      h->minimized = false;
    });
    pass_start_size_ = static_cast<long>(wdiff_.num_live_states() + wdiff_.num_arrows());
    pass_growth_baseline_ = growth_counter();
    new_in_pass_ = 0;
    bool aborted = false;

    for (Store::Handle h : store_.snapshot(StoreList::kDelete)) store_.erase(h);

    for (Store::Handle h : store_.snapshot(StoreList::kConsidered)) {
      if (h->dead || h->where != StoreList::kConsidered || h->minimized) continue;
      process_store_rule(h);
    }

    while (Store::Handle h = store_.front(StoreList::kNew)) {
      if (should_abort()) {
        aborted = true;
        break;
      }
      process_store_rule(h);
    }

    if (aborted) {
      ++stats_.aborts;
      wdiff_.mark_all_needed();
      finalize_pass();
      PassReport rep{pass_no_, store_.size(), wdiff_.num_live_states(), new_in_pass_, true, false};
      return rep;
    }

    while (Store::Handle h = store_.front(StoreList::kThis)) {
      store_.move_to(h, StoreList::kConsidered, h->priority);
      const Rule r = h->rule;
      std::vector<Store::Handle> targets = store_.snapshot(StoreList::kConsidered);
      if (h->priority) {
        auto extra = store_.snapshot(StoreList::kThis);
        targets.insert(targets.end(), extra.begin(), extra.end());
      }
      for (Store::Handle other : targets) {
        if (other->dead) continue;
        for (const Rule& nr : overlap_consequences(r, other->rule)) insert_rule(nr, StoreList::kNew, false, false);
      }
    }

    bool same = finalize_pass();
    PassReport rep{pass_no_, store_.size(), wdiff_.num_live_states(), new_in_pass_, false, same && !had_this};
    return rep;
  }

  using PassObserver = std::function<void(const KbDriver&, const PassReport&)>;

  /// Runs passes until the rule automaton reaches a fixed point with no
  /// pending store work, or a limit trips.
  RunResult run(const PassObserver& observer = {}) {
    RunResult res;
    for (;;) {
      if (pass_no_ >= limits_.max_passes) {
        res.status = RunStatus::kPassLimit;
        break;
      }
      PassReport rep = kb_pass();
      res.reports.push_back(rep);
      if (observer) observer(*this, rep);
      check_reducibility_samples();
      if (rep.stable) {
        res.status = RunStatus::kStabilized;
        break;
      }
      if (wdiff_.num_live_states() > limits_.max_wdiff_states) {
        res.status = RunStatus::kStateLimit;
        break;
      }
      if (store_.size() > limits_.max_rules) {
        res.status = RunStatus::kRuleLimit;
        break;
      }
    }
    res.rules = rules_;
    res.passes = pass_no_;
    res.stats = stats_;
    return res;
  }

  /// Words whose store-reducibility is re-checked at every pass boundary;
  /// once reducible they must stay reducible.
  void add_reducibility_samples(const std::vector<Word>& samples) {
    for (const Word& w : samples) samples_.emplace_back(w, store_.reduces(w));
  }

 private:
  struct Tag {};
  KbDriver(const Presentation& p, Tag) : alphabet_(p.alphabet), wdiff_(alphabet_) {
    rules_ = wdiff_.freeze();
    engine_ = std::make_unique<ReductionEngine>(rules_);
  }

  long growth_counter() const {
    const auto& s = wdiff_.stats();
    return s.states_added + s.arrows_added + s.merges;
  }

  bool grew(const WeldGraph::Stats& before) const {
    const auto& s = wdiff_.stats();
    return s.states_added > before.states_added || s.arrows_added > before.arrows_added;
  }

  bool should_abort() const {
    if (!limits_.enable_abort) return false;
    long growth = growth_counter() - pass_growth_baseline_;
    long threshold = std::max<long>(limits_.abort_growth_floor,
                                    static_cast<long>(limits_.abort_growth_ratio * pass_start_size_));
    return growth > threshold;
  }

  void note_discovered(const Rule& r) {
    bool prio = unit_active_ && growth_counter() > unit_growth_baseline_;
    if (unit_active_ && rule_cmp(r, unit_input_) != std::strong_ordering::less) ++stats_.oversized_new_rules;
    insert_rule(r, StoreList::kNew, prio, prio);
  }

  Store::Handle insert_rule(const Rule& r, StoreList list, bool front, bool priority) {
    if (store_.contains(r)) return nullptr;
    if (store_.tombstoned(r)) {
      ++stats_.resurrection_violations;
      return nullptr;
    }
    if (list == StoreList::kNew) ++new_in_pass_;
    return store_.insert(r, list, front || priority, priority);
  }

  /// Between passes the state labels must be irreducible with respect to
  /// the rules wdiff itself holds, and distinct: reduce them with a
  /// temporary engine over a frozen copy, join equal labels, weld, repeat.
  void stabilize_wdiff_labels() {
    for (;;) {
      wdiff_.settle();
      RuleAutomaton tmp = wdiff_.freeze();
      ReductionEngine tmp_engine(tmp);
      bool changed = false;
      for (int s : wdiff_.live_states()) {
        const Word w = wdiff_.label(s);
        Word r = tmp_engine.reduce_word(w);
        if (r != w) {
          wdiff_.relabel(s, r);
          changed = true;
        }
      }
      std::map<Word, int> first;
      first.emplace(Word{}, wdiff_.start());
      for (int s : wdiff_.live_states()) {
        auto [it, inserted] = first.emplace(wdiff_.label(s), s);
        if (!inserted && wdiff_.canonical(it->second) != wdiff_.canonical(s)) {
          wdiff_.join(it->second, s);
          changed = true;
        }
      }
      wdiff_.settle();
      if (!changed) return;
    }
  }

  void check_reducibility_samples() {
    for (auto& [w, was] : samples_) {
      bool now = store_.reduces(w);
      if (was && !now) ++stats_.monotonicity_violations;
      if (now) was = true;
    }
  }

  Alphabet alphabet_;
  Store store_;
  WordDiffAutomaton wdiff_;
  RuleAutomaton rules_;
  std::unique_ptr<ReductionEngine> engine_;
  KbLimits limits_;
  KbStats stats_;
  int pass_no_ = 0;

  long pass_start_size_ = 0;
  long pass_growth_baseline_ = 0;
  size_t new_in_pass_ = 0;

  bool unit_active_ = false;
  long unit_growth_baseline_ = 0;
  Rule unit_input_;

  std::vector<std::pair<Word, bool>> samples_;
};

}  // namespace kbweld
