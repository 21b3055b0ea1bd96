#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "kbweld/words.hpp"

using namespace kbweld;
using kbweld::testing::free2_alpha;
using kbweld::testing::z2_alpha_finite_order;
using kbweld::testing::z2_alpha_infinite_order;

namespace {

std::vector<Word> all_words(int num_letters, int max_len) {
  std::vector<Word> out{{}};
  size_t begin = 0;
  for (int len = 1; len <= max_len; ++len) {
    size_t end = out.size();
    for (size_t i = begin; i < end; ++i) {
      for (Letter l = 0; l < num_letters; ++l) {
        Word w = out[i];
        w.push_back(l);
        out.push_back(std::move(w));
      }
    }
    begin = end;
  }
  return out;
}

}  // namespace

TEST_CASE("shortlex comparison") {
  Alphabet a = z2_alpha_infinite_order();  // x < y < X < Y
  CHECK(shortlex_cmp(a.parse_word("y"), a.parse_word("xy")) == std::strong_ordering::less);
  CHECK(shortlex_cmp(a.parse_word("yx"), a.parse_word("xy")) == std::strong_ordering::greater);
  CHECK(shortlex_cmp(Word{}, Word{}) == std::strong_ordering::equal);
}

TEST_CASE("shortlex is a strict total order on short words") {
  auto words = all_words(2, 4);
  for (const Word& u : words) {
    for (const Word& v : words) {
      auto uv = shortlex_cmp(u, v);
      auto vu = shortlex_cmp(v, u);
      if (u == v) {
        CHECK(uv == std::strong_ordering::equal);
      } else {
        CHECK(uv != std::strong_ordering::equal);
        CHECK(((uv == std::strong_ordering::less) == (vu == std::strong_ordering::greater)));
      }
      for (const Word& w : words) {
        if (shortlex_less(u, v) && shortlex_less(v, w)) CHECK(shortlex_less(u, w));
      }
    }
  }
}

TEST_CASE("shortlex is invariant under one-letter padding on both sides") {
  auto words = all_words(2, 3);
  for (const Word& u : words) {
    for (const Word& v : words) {
      if (!shortlex_less(u, v)) continue;
      for (Letter a = 0; a < 2; ++a) {
        for (Letter b = 0; b < 2; ++b) {
          Word au{a}, av{a};
          au.insert(au.end(), u.begin(), u.end());
          au.push_back(b);
          av.insert(av.end(), v.begin(), v.end());
          av.push_back(b);
          CHECK(shortlex_less(au, av));
        }
      }
    }
  }
}

TEST_CASE("rule comparison orders by lhs, then rhs") {
  Alphabet a = z2_alpha_infinite_order();
  Rule r1{a.parse_word("yx"), a.parse_word("xy")};
  Rule r2{a.parse_word("yX"), a.parse_word("Xy")};
  CHECK(rule_cmp(r1, r2) == std::strong_ordering::less);
  Rule r3{a.parse_word("xyX"), a.parse_word("y")};
  CHECK(rule_cmp(r3, r1) == std::strong_ordering::greater);
  CHECK(rule_cmp(r1, r1) == std::strong_ordering::equal);
}

TEST_CASE("padding") {
  Alphabet a({"a", "b", "c", "d"});
  Word u = a.parse_word("abb");
  Word v = a.parse_word("ccdc");
  PaddedPair p = pad(u, v, a);
  REQUIRE(p.size() == 4);
  CHECK(p[0] == std::make_pair(*a.find("a"), *a.find("c")));
  CHECK(p[1] == std::make_pair(*a.find("b"), *a.find("c")));
  CHECK(p[2] == std::make_pair(*a.find("b"), *a.find("d")));
  CHECK(p[3] == std::make_pair(a.pad(), *a.find("c")));

  CHECK(pad(Word{}, Word{}, a).empty());

  Word ab = a.parse_word("ab");
  PaddedPair same = pad(ab, ab, a);
  REQUIRE(same.size() == 2);
  CHECK(same[0].first == same[0].second);

  SUBCASE("unpad inverts pad") {
    auto words = all_words(3, 3);
    for (const Word& x : words)
      for (const Word& y : words) {
        auto [bx, by] = unpad(pad(x, y, a), a);
        CHECK(bx == x);
        CHECK(by == y);
      }
  }
}

TEST_CASE("formal inverse") {
  Alphabet a = z2_alpha_infinite_order();
  CHECK(formal_inverse(a.parse_word("xy"), a) == a.parse_word("YX"));
  CHECK(formal_inverse(Word{}, a).empty());
  CHECK(formal_inverse(a.parse_word("xX"), a) == a.parse_word("xX"));
  auto words = all_words(4, 3);
  for (const Word& w : words) CHECK(formal_inverse(formal_inverse(w, a), a) == w);
}

TEST_CASE("relator normalization") {
  Alphabet a = z2_alpha_infinite_order();
  SUBCASE("commutator gives the commuting rule") {
    auto r = relator_to_rule(a.parse_word("xyXY"), a);
    REQUIRE(r.has_value());
    CHECK(r->lhs == a.parse_word("yx"));
    CHECK(r->rhs == a.parse_word("xy"));
  }
  SUBCASE("torsion relator splits with the longer left side") {
    Alphabet f({"x", "X"});
    f.set_inverse(0, 1);
    auto r = relator_to_rule(f.parse_word("xxx"), f);
    REQUIRE(r.has_value());
    CHECK(r->lhs == f.parse_word("xx"));
    CHECK(r->rhs == f.parse_word("X"));
    CHECK(is_admissible_rule_pair(r->lhs, r->rhs));
  }
  SUBCASE("trivial relator yields nothing") {
    CHECK(!relator_to_rule(a.parse_word("xX"), a).has_value());
  }
  SUBCASE("every produced rule is admissible and balanced") {
    Alphabet f = free2_alpha();
    for (const char* rel : {"abAB", "aabb", "ababab", "aBaBB", "bbbbbbb"}) {
      auto r = relator_to_rule(f.parse_word(rel), f);
      REQUIRE(r.has_value());
      CHECK(is_admissible_rule_pair(r->lhs, r->rhs));
      CHECK(r->rhs.size() <= r->lhs.size());
      CHECK(r->lhs.size() <= r->rhs.size() + 1);
    }
  }
}

TEST_CASE("admissible pair predicate matches its definition") {
  auto words = all_words(2, 4);
  for (const Word& u : words) {
    for (const Word& v : words) {
      bool expect = !(u.size() && v.size() && u[0] == v[0]) && shortlex_greater(u, v) &&
                    v.size() <= u.size() && u.size() <= v.size() + 2;
      CHECK(is_admissible_rule_pair(u, v) == expect);
    }
  }
}

TEST_CASE("rendering and parsing") {
  Alphabet a = z2_alpha_finite_order();
  CHECK(a.render(Word{}) == "e");
  CHECK(a.render(a.parse_word("xXyY")) == "xXyY");
  CHECK(a.parse_word("e").empty());

  Alphabet multi;
  multi.add_letter("g1");
  multi.add_letter("g2");
  CHECK(multi.render(Word{0, 1}) == "g1*g2");
  CHECK(multi.parse_word("g1*g2") == Word{0, 1});
  CHECK_THROWS(multi.parse_word("g3"));
}
