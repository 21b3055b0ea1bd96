#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "kbweld/kb.hpp"
#include "kbweld/oracle.hpp"

using namespace kbweld;
using namespace kbweld::testing;

namespace {

std::vector<Word> ball(const Alphabet& a, int max_len) {
  std::vector<Word> out{{}};
  size_t begin = 0;
  for (int len = 1; len <= max_len; ++len) {
    size_t end = out.size();
    for (size_t i = begin; i < end; ++i)
      for (Letter l = 0; l < a.size(); ++l) {
        Word w = out[i];
        w.push_back(l);
        out.push_back(std::move(w));
      }
    begin = end;
  }
  return out;
}

KbDriver stabilized_z2() {
  KbDriver driver(z2_presentation(z2_alpha_infinite_order()), KbLimits{});
  RunResult res = driver.run();
  REQUIRE(res.stabilized());
  return driver;
}

}  // namespace

TEST_CASE("minimize_rule") {
  SUBCASE("fully redundant rule collapses to the trivial pair") {
    KbDriver driver = stabilized_z2();
    const Alphabet& a = driver.alphabet();
    auto mr = driver.minimize_rule({a.parse_word("yxx"), a.parse_word("xxy")});
    CHECK(mr.rule.trivial());
    CHECK(mr.proper_substring_reduced);
  }
  SUBCASE("a minimal rule is returned unchanged") {
    KbDriver driver = stabilized_z2();
    const Alphabet& a = driver.alphabet();
    Rule r{a.parse_word("yx"), a.parse_word("xy")};
    auto mr = driver.minimize_rule(r);
    CHECK(mr.rule == r);
    CHECK(!mr.proper_substring_reduced);
  }
  SUBCASE("overlong rules move inverted letters to the right-hand side") {
    KbDriver driver = KbDriver::bare(free2_alpha());
    const Alphabet& a = driver.alphabet();
    auto mr = driver.minimize_rule({a.parse_word("bab"), a.parse_word("a")});
    CHECK(mr.rule == Rule{a.parse_word("ba"), a.parse_word("aB")});
    CHECK(!mr.proper_substring_reduced);
  }
  SUBCASE("outputs stay oriented and admissible") {
    KbDriver driver = stabilized_z2();
    const Alphabet& a = driver.alphabet();
    std::mt19937 rng(31);
    std::uniform_int_distribution<int> letter(0, a.size() - 1);
    for (int trial = 0; trial < 100; ++trial) {
      Word u, v;
      for (int i = 0; i < 2 + trial % 4; ++i) u.push_back(letter(rng));
      for (int i = 0; i < trial % 3; ++i) v.push_back(letter(rng));
      if (!shortlex_greater(u, v)) continue;
      if (oracle::z2_exponents(u, a) != oracle::z2_exponents(v, a)) continue;  // must be a true identity
      auto mr = driver.minimize_rule({u, v});
      if (mr.rule.trivial()) continue;
      CHECK(shortlex_greater(mr.rule.lhs, mr.rule.rhs));
      CHECK(oracle::z2_rule_valid(mr.rule, a));
      CHECK(rule_cmp(mr.rule, Rule{u, v}) != std::strong_ordering::greater);
    }
  }
}

TEST_CASE("handle_output routing") {
  SUBCASE("minimal rule found in New moves to This") {
    KbDriver driver = stabilized_z2();
    const Alphabet& a = driver.alphabet();
    // a genuine family rule absent from the store
    Rule r = family_rule(a, 6);
    while (driver.store().contains(r)) r = family_rule(a, static_cast<int>(r.rhs.size()) + 1);
    Store::Handle h = driver.store().insert(r, StoreList::kNew, false, false);
    driver.process_store_rule(h);
    CHECK(h->where == StoreList::kThis);
    CHECK(h->minimal);
  }
  SUBCASE("rule with a reducible proper substring of its lhs is deleted outright") {
    KbDriver driver = stabilized_z2();
    const Alphabet& a = driver.alphabet();
    Rule r{a.parse_word("yxx"), a.parse_word("xxy")};
    REQUIRE(!driver.store().contains(r));
    Store::Handle h = driver.store().insert(r, StoreList::kNew, false, false);
    driver.process_store_rule(h);
    CHECK(h->dead);
    CHECK(driver.store().tombstoned(r));
  }
  SUBCASE("non-minimal rule with irreducible proper substrings parks in Delete") {
    KbDriver driver = KbDriver::bare(free2_alpha());
    const Alphabet& a = driver.alphabet();
    // proper substrings "ba" and "ab" are irreducible on the bare engine,
    // but the balance step still rewrites the rule
    Rule r{a.parse_word("bab"), a.parse_word("a")};
    Store::Handle h = driver.store().insert(r, StoreList::kNew, false, false);
    driver.process_store_rule(h);
    CHECK(h->where == StoreList::kDelete);
    Rule expect{a.parse_word("ba"), a.parse_word("aB")};
    Store::Handle copy = driver.store().find_exact(expect);
    REQUIRE(copy != nullptr);
    CHECK(copy->where == StoreList::kThis);
    CHECK(copy->minimal);
  }
}

TEST_CASE("overlap consequences") {
  KbDriver driver(z2_presentation(z2_alpha_infinite_order()), KbLimits{});
  const Alphabet& a = driver.alphabet();
  SUBCASE("the commuting rule against a deleting rule spawns the first family member") {
    Rule swap{a.parse_word("yx"), a.parse_word("xy")};
    Rule del{a.parse_word("xX"), Word{}};
    auto out = driver.overlap_consequences(swap, del);
    Rule expect = family_rule(a, 1);
    CHECK(std::find(out.begin(), out.end(), expect) != out.end());
  }
  SUBCASE("inverse deleting rules only meet in resolved pairs") {
    Rule r1{a.parse_word("xX"), Word{}};
    Rule r2{a.parse_word("Xx"), Word{}};
    auto out = driver.overlap_consequences(r1, r2);
    CHECK(out.empty());  // (x, x) and (X, X) both collapse
  }
  SUBCASE("a rule without self-overlap yields nothing against itself") {
    Rule swap{a.parse_word("yx"), a.parse_word("xy")};
    CHECK(driver.overlap_consequences(swap, swap).empty());
  }
}

TEST_CASE("sewing") {
  Alphabet a = z2_alpha_infinite_order();
  SUBCASE("sewing the second family member completes the loop machine") {
    KbDriver driver = KbDriver::bare(a);
    CHECK(driver.sew(family_rule(a, 1)));
    CHECK(driver.sew(family_rule(a, 2)));
    RuleAutomaton got = driver.wdiff().freeze();
    CHECK(got.canonical() == family_rule_automaton(a).canonical());
  }
  SUBCASE("sewing an accepted rule only marks, never grows") {
    KbDriver driver = KbDriver::bare(a);
    driver.sew(family_rule(a, 1));
    driver.sew(family_rule(a, 2));
    auto states_before = driver.wdiff().num_live_states();
    CHECK(!driver.sew(family_rule(a, 5)));
    CHECK(driver.wdiff().num_live_states() == states_before);
    // the path it read is marked as needed
    CHECK(driver.wdiff().state_needed(driver.wdiff().start()));
  }
  SUBCASE("sewing into a bare automaton creates labelled difference states") {
    KbDriver driver = KbDriver::bare(a);
    auto before = driver.wdiff().stats().states_added;
    CHECK(driver.sew(Rule{a.parse_word("yx"), a.parse_word("xy")}));
    CHECK(driver.wdiff().stats().states_added - before == 2);
    CHECK(driver.wdiff().num_live_states() == 2);  // one merged back into the start state
    auto labelled = driver.wdiff().state_with_label(a.parse_word("Yx"));
    CHECK(labelled.has_value());
  }
}

TEST_CASE("finalize_pass") {
  Alphabet a = z2_alpha_infinite_order();
  SUBCASE("a stable automaton reports canonical equality") {
    KbDriver driver = stabilized_z2();
    driver.wdiff().mark_all_needed();
    CHECK(driver.finalize_pass());
  }
  SUBCASE("unneeded states vanish") {
    KbDriver driver = KbDriver::bare(a);
    driver.sew(family_rule(a, 1));  // marks everything it makes
    // a junk state nobody marked
    driver.wdiff().new_state(a.parse_word("YY"), false);
    size_t with_junk = driver.wdiff().num_live_states();
    driver.finalize_pass();
    CHECK(driver.rules().num_states < static_cast<int>(with_junk));
  }
}

TEST_CASE("full runs") {
  SUBCASE("interleaved abelian order stabilizes to the eight-rule system") {
    Alphabet a = z2_alpha_finite_order();
    KbDriver driver(z2_presentation(a), KbLimits{});
    RunResult res = driver.run();
    REQUIRE(res.stabilized());
    auto w = [&a](const char* s) { return a.parse_word(s); };
    oracle::FiniteRuleSet eight{{{w("xX"), {}}, {w("Xx"), {}}, {w("yY"), {}}, {w("Yy"), {}},
                                {w("yx"), w("xy")}, {w("yX"), w("Xy")}, {w("Yx"), w("xY")},
                                {w("YX"), w("XY")}}};
    ReductionEngine eng(res.rules);
    for (const Word& u : ball(a, 5)) CHECK(eng.reduce_word(u) == oracle::naive_reduce(eight, u));
  }
  SUBCASE("stacked abelian order stabilizes onto the infinite family") {
    Alphabet a = z2_alpha_infinite_order();
    KbDriver driver(z2_presentation(a), KbLimits{});
    RunResult res = driver.run();
    REQUIRE(res.stabilized());
    for (int n = 1; n <= 10; ++n) CHECK(accepts_rule(res.rules, family_rule(a, n)));
    ReductionEngine eng(res.rules);
    for (const Word& u : ball(a, 5)) {
      auto [ex, ey] = oracle::z2_exponents(u, a);
      CHECK(eng.reduce_word(u) == oracle::z2_normal_form(ex, ey, a));
    }
  }
  SUBCASE("the one-relator trivial group reduces everything to the empty word") {
    Alphabet a({"a", "A"});
    a.set_inverse(0, 1);
    Presentation p{a, {a.parse_word("a")}};
    KbDriver driver(p, KbLimits{});
    RunResult res = driver.run();
    REQUIRE(res.stabilized());
    ReductionEngine eng(res.rules);
    for (const Word& u : ball(a, 6)) CHECK(eng.reduce_word(u).empty());
  }
  SUBCASE("a pass over an already stable state reports equality") {
    KbDriver driver = stabilized_z2();
    PassReport rep = driver.kb_pass();
    CHECK(rep.stable);
    CHECK(!rep.aborted);
  }
}

TEST_CASE("run invariants") {
  SUBCASE("no resurrection, monotone reducibility, shrinking side products") {
    for (int fixture = 0; fixture < 2; ++fixture) {
      Alphabet a = fixture == 0 ? z2_alpha_infinite_order() : z2_alpha_finite_order();
      KbDriver driver(z2_presentation(a), KbLimits{});
      std::vector<Word> samples;
      std::mt19937 rng(fixture + 1);
      std::uniform_int_distribution<int> letter(0, a.size() - 1);
      for (int i = 0; i < 30; ++i) {
        Word w;
        for (int j = 0; j < 2 + i % 5; ++j) w.push_back(letter(rng));
        samples.push_back(std::move(w));
      }
      driver.add_reducibility_samples(samples);
      RunResult res = driver.run();
      REQUIRE(res.stabilized());
      CHECK(res.stats.resurrection_violations == 0);
      CHECK(res.stats.monotonicity_violations == 0);
      CHECK(res.stats.oversized_new_rules == 0);
    }
  }
  SUBCASE("congruence holds at every pass boundary") {
    Alphabet a = z2_alpha_infinite_order();
    KbDriver driver(z2_presentation(a), KbLimits{});
    bool all_valid = true;
    RunResult res = driver.run([&](const KbDriver& d, const PassReport&) {
      for (const Rule& r : enumerate_rules(d.rules(), 6))
        if (!oracle::z2_rule_valid(r, d.alphabet())) all_valid = false;
      d.store().for_each([&](Store::Handle h) {
        if (!oracle::z2_rule_valid(h->rule, d.alphabet())) all_valid = false;
      });
    });
    REQUIRE(res.stabilized());
    CHECK(all_valid);
  }
  SUBCASE("limits flag partial results") {
    Alphabet a = z2_alpha_infinite_order();
    KbLimits lim;
    lim.max_passes = 2;
    KbDriver driver(z2_presentation(a), lim);
    RunResult res = driver.run();
    CHECK(res.status == RunStatus::kPassLimit);
    CHECK(!res.stabilized());
  }
}

TEST_CASE("pass report line format") {
  PassReport rep{3, 14, 9, 2, false, true};
  CHECK(rep.line() == "pass 3 rules=14 wdiff_states=9 new=2 aborted=false stable=true");
}

TEST_CASE("the stabilized rule set is permanent across further passes") {
  KbDriver driver = stabilized_z2();
  auto before = enumerate_rules(driver.rules(), 8);
  REQUIRE(!before.empty());
  PassReport rep = driver.kb_pass();
  CHECK(rep.stable);
  CHECK(enumerate_rules(driver.rules(), 8) == before);
  // and once more for good measure
  driver.kb_pass();
  CHECK(enumerate_rules(driver.rules(), 8) == before);
}

TEST_CASE("label reduction between passes collapses synonymous states") {
  // welding the confluent rule list with freely reduced labels leaves
  // distinct states for the same group element; the completion run reduces
  // labels against the automaton itself and merges them, landing exactly on
  // the nine word differences of the plane
  Alphabet a = z2_alpha_infinite_order();
  RuleAutomaton naive = z2_confluent_automaton();
  KbDriver driver = stabilized_z2();
  CHECK(driver.rules().num_states < naive.num_states);
  CHECK(driver.rules().num_states == 9);
  std::set<Word> labels;
  for (const Word& w : driver.rules().labels) labels.insert(w);
  std::set<Word> expect;
  for (const char* s : {"e", "x", "y", "X", "Y", "xy", "xY", "yX", "XY"}) expect.insert(a.parse_word(s));
  CHECK(labels == expect);
}
