#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "kbweld/io.hpp"
#include "kbweld/kb.hpp"
#include "kbweld/oracle.hpp"
#include "kbweld/reduction.hpp"

using namespace kbweld;
using namespace kbweld::testing;

namespace {

const char* kZ2File = R"(# free abelian group of rank two
generators: x X y Y
inverses: x X y Y
order: x y X Y
relators:
xyXY
)";

}  // namespace

TEST_CASE("presentation parsing") {
  SUBCASE("well-formed file") {
    Presentation p = parse_presentation(kZ2File);
    CHECK(p.alphabet.size() == 4);
    CHECK(p.alphabet.name(0) == "x");
    CHECK(p.alphabet.name(1) == "y");  // the order section drives letter indices
    CHECK(p.alphabet.inverse(*p.alphabet.find("x")) == *p.alphabet.find("X"));
    REQUIRE(p.relators.size() == 1);
    CHECK(p.relators[0] == p.alphabet.parse_word("xyXY"));
  }
  SUBCASE("empty relator list is a free group") {
    Presentation p = parse_presentation("generators: a A\ninverses: a A\norder: a A\nrelators:\n");
    CHECK(p.relators.empty());
    CHECK(p.alphabet.inverse_closed());
  }
  SUBCASE("generator without an inverse is an error") {
    CHECK_THROWS_AS(parse_presentation("generators: a A b\ninverses: a A\norder: a A b\n"), ParseError);
  }
  SUBCASE("duplicate order entries are an error") {
    CHECK_THROWS_AS(parse_presentation("generators: a A\ninverses: a A\norder: a a\n"), ParseError);
  }
  SUBCASE("unknown symbols carry line numbers") {
    try {
      parse_presentation("generators: a A\ninverses: a A\norder: a A\nrelators:\nagh\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line == 5);
    }
  }
}

TEST_CASE("rule automaton serialization") {
  Alphabet a = z2_alpha_infinite_order();

  SUBCASE("the loop-family machine round-trips and is bit-stable") {
    RuleAutomaton ra = family_rule_automaton(a);
    std::string text = serialize_rule_automaton(ra);
    ParsedAutomaton parsed = deserialize_automaton(text);
    REQUIRE(parsed.rule_automaton.has_value());
    CHECK(parsed.rule_automaton->canonical() == ra.canonical());
    CHECK(serialize_rule_automaton(*parsed.rule_automaton) == text);
  }
  SUBCASE("isomorphic machines serialize identically") {
    // build the same machine twice along different construction orders
    WordDiffAutomaton wd1 = build_rule_automaton({family_rule(a, 1), family_rule(a, 2)}, a);
    WordDiffAutomaton wd2 = build_rule_automaton({family_rule(a, 2), family_rule(a, 1)}, a);
    CHECK(serialize_rule_automaton(wd1.freeze()) == serialize_rule_automaton(wd2.freeze()));
  }
  SUBCASE("golden file for the loop-family machine") {
    RuleAutomaton ra = family_rule_automaton(a);
    std::string expect =
        "fsa 3 20\n"
        "generators x y X Y\n"
        "inverses x X y Y X x Y y\n"
        "initial 0\n"
        "final 0\n"
        "label2 0 x y 1\n"
        "label2 1 y y 1\n"
        "label2 1 y - 2\n"
        "label2 2 X - 0\n"
        "statelabel 0 e\n"
        "statelabel 1 Xy\n"
        "statelabel 2 YXy\n";
    CHECK(serialize_rule_automaton(ra) == expect);
  }
  SUBCASE("truncated input is an error") {
    CHECK_THROWS_AS(deserialize_automaton("generators x y\n"), ParseError);
    CHECK_THROWS_AS(deserialize_automaton("fsa 2 20\nlabel2 0 x\n"), ParseError);
    CHECK_THROWS_AS(deserialize_automaton("fsa 2 4\narrow 0 9 1\n"), ParseError);
  }
}

TEST_CASE("plain automaton serialization") {
  Alphabet a = z2_alpha_infinite_order();
  Nfa n = expected_family_machine(a);
  std::string text = serialize_nfa(n);
  ParsedAutomaton parsed = deserialize_automaton(text);
  CHECK(!parsed.two_variable);
  CHECK(canonical_form(parsed.nfa) == canonical_form(n));
}

TEST_CASE("serialization fidelity for stabilized runs") {
  Alphabet a = z2_alpha_infinite_order();
  KbDriver driver(z2_presentation(a), KbLimits{});
  RunResult res = driver.run();
  REQUIRE(res.stabilized());

  std::string text = serialize_rule_automaton(res.rules);
  ParsedAutomaton parsed = deserialize_automaton(text);
  REQUIRE(parsed.rule_automaton.has_value());

  ReductionEngine direct(res.rules);
  ReductionEngine restored(*parsed.rule_automaton);
  std::mt19937 rng(9);
  std::uniform_int_distribution<int> letter(0, a.size() - 1);
  for (int trial = 0; trial < 300; ++trial) {
    Word w;
    for (int i = 0; i < trial % 9; ++i) w.push_back(letter(rng));
    CHECK(direct.reduce_word(w) == restored.reduce_word(w));
  }
}
