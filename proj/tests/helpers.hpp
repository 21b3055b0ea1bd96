#pragma once

#include <random>
#include <set>
#include <vector>

#include "kbweld/fsa.hpp"
#include "kbweld/kb.hpp"
#include "kbweld/rules.hpp"
#include "kbweld/welding.hpp"
#include "kbweld/words.hpp"

namespace kbweld::testing {

// ---- fixture alphabets and presentations ----

// rank-two free abelian group, order x < X < y < Y (finite confluent system)
inline Alphabet z2_alpha_finite_order() {
  Alphabet a({"x", "X", "y", "Y"});
  a.set_inverse(0, 1);
  a.set_inverse(2, 3);
  return a;
}

// rank-two free abelian group, order x < y < X < Y (infinite confluent system)
inline Alphabet z2_alpha_infinite_order() {
  Alphabet a({"x", "y", "X", "Y"});
  a.set_inverse(0, 2);
  a.set_inverse(1, 3);
  return a;
}

inline Presentation z2_presentation(const Alphabet& a) {
  Presentation p;
  p.alphabet = a;
  p.relators = {a.parse_word("xyXY")};
  return p;
}

inline Alphabet free2_alpha() {
  Alphabet a({"a", "A", "b", "B"});
  a.set_inverse(0, 1);
  a.set_inverse(2, 3);
  return a;
}

inline Presentation s3_presentation() {
  Presentation p;
  p.alphabet = free2_alpha();
  p.relators = {p.alphabet.parse_word("aa"), p.alphabet.parse_word("bbb"), p.alphabet.parse_word("abab")};
  return p;
}

inline Presentation triangle237_presentation() {
  Presentation p;
  p.alphabet = free2_alpha();
  p.relators = {p.alphabet.parse_word("aa"), p.alphabet.parse_word("bbb"),
                p.alphabet.parse_word("ababababababab")};
  return p;
}

// ---- the looped-family fixture ----
//
// The four-state machine accepting exactly the pairs (x y^n X, y^n), n >= 1,
// over the order x < y < X < Y; the classic picture of an infinite rule
// family held in finitely many states.

inline Rule family_rule(const Alphabet& a, int n) {
  Word lhs = a.parse_word("x");
  for (int i = 0; i < n; ++i) lhs.push_back(*a.find("y"));
  lhs.push_back(*a.find("X"));
  Word rhs;
  for (int i = 0; i < n; ++i) rhs.push_back(*a.find("y"));
  return {lhs, rhs};
}

inline Nfa family_union(const Alphabet& a, int count) {
  std::vector<Nfa> parts;
  for (int n = 1; n <= count; ++n) parts.push_back(rule_path_nfa(family_rule(a, n), a));
  return disjoint_union(parts);
}

inline Nfa expected_family_machine(const Alphabet& a) {
  Nfa n;
  n.num_labels = a.num_pair_labels();
  for (int i = 0; i < 4; ++i) n.add_state();
  Letter x = *a.find("x"), y = *a.find("y"), ix = *a.find("X");
  n.add_arrow(0, a.pair_label(x, y), 1);
  n.add_arrow(1, a.pair_label(y, y), 1);
  n.add_arrow(1, a.pair_label(y, a.pad()), 2);
  n.add_arrow(2, a.pair_label(ix, a.pad()), 3);
  n.initials = {0};
  n.finals = {3};
  return n;
}

// Frozen rule automaton for the infinite-order rank-two abelian fixture:
// welding the defining rules together with the four extra family rules gives
// a machine whose rule set is confluent.
inline RuleAutomaton z2_confluent_automaton() {
  Alphabet a = z2_alpha_infinite_order();
  auto w = [&a](const char* s) { return a.parse_word(s); };
  std::vector<Rule> rules = {
      {w("xX"), {}}, {w("Xx"), {}}, {w("yY"), {}}, {w("Yy"), {}},
      {w("yx"), w("xy")}, {w("Xy"), w("yX")}, {w("Yx"), w("xY")}, {w("YX"), w("XY")},
      {w("xyX"), w("y")}, {w("xyyX"), w("yy")}, {w("yXY"), w("X")}, {w("yXXY"), w("XX")},
  };
  WordDiffAutomaton wd = build_rule_automaton(rules, a);
  return wd.freeze();
}

// Rule automaton view of the looped-family machine alone, with the loop
// closed through the start state.
inline RuleAutomaton family_rule_automaton(const Alphabet& a) {
  WordDiffAutomaton wd = build_rule_automaton({family_rule(a, 1), family_rule(a, 2)}, a);
  return wd.freeze();
}

// ---- random automata ----

inline Nfa random_nfa(std::mt19937& rng, int max_states = 8, int num_labels = 3, double arrow_density = 1.6,
                      bool with_epsilon = false) {
  std::uniform_int_distribution<int> states_dist(2, max_states);
  Nfa n;
  n.num_labels = num_labels;
  n.num_states = states_dist(rng);
  std::uniform_int_distribution<int> state(0, n.num_states - 1);
  std::uniform_int_distribution<int> label(with_epsilon ? -1 : 0, num_labels - 1);
  int num_arrows = static_cast<int>(arrow_density * n.num_states) + 1;
  for (int i = 0; i < num_arrows; ++i) n.add_arrow(state(rng), label(rng), state(rng));
  n.initials = {state(rng)};
  int nf = 1 + state(rng) % 2;
  for (int i = 0; i < nf; ++i) n.finals.push_back(state(rng));
  std::sort(n.finals.begin(), n.finals.end());
  n.finals.erase(std::unique(n.finals.begin(), n.finals.end()), n.finals.end());
  return n;
}

inline bool bounded_language_equal(const Nfa& a, const Nfa& b, int max_len) {
  return enumerate_language(a, max_len) == enumerate_language(b, max_len);
}

}  // namespace kbweld::testing
