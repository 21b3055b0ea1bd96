#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "kbweld/words.hpp"

// Brute-force machinery for tests and the verify command.  Nothing here
// shares code with the automaton-based reduction path; independence is the
// point.

namespace kbweld::oracle {

struct FiniteRuleSet {
  std::vector<Rule> rules;
};

/// Applies leftmost, then shortest-lhs elementary reductions until the word
/// is irreducible.
inline Word naive_reduce(const FiniteRuleSet& rs, Word w) {
  for (;;) {
    size_t best_pos = w.size() + 1;
    const Rule* best = nullptr;
    for (const Rule& r : rs.rules) {
      if (r.lhs.empty() || r.lhs.size() > w.size()) continue;
      auto it = std::search(w.begin(), w.end(), r.lhs.begin(), r.lhs.end());
      if (it == w.end()) continue;
      size_t pos = static_cast<size_t>(it - w.begin());
      if (pos < best_pos ||
          (pos == best_pos && best &&
           (r.lhs.size() < best->lhs.size() ||
            (r.lhs.size() == best->lhs.size() && shortlex_less(r.rhs, best->rhs))))) {
        best_pos = pos;
        best = &r;
      }
    }
    if (!best) return w;
    Word next(w.begin(), w.begin() + best_pos);
    next.insert(next.end(), best->rhs.begin(), best->rhs.end());
    next.insert(next.end(), w.begin() + best_pos + best->lhs.size(), w.end());
    w = std::move(next);
  }
}

struct NaiveKbResult {
  bool success = false;
  FiniteRuleSet rules;
};

/// Textbook completion with explicit rules: process equations by reducing
/// both sides and orienting by shortlex, interreduce, and queue every
/// overlap (suffix/prefix) between left-hand sides.  Succeeds only if the
/// queue empties within the bounds, in which case the result is confluent.
inline NaiveKbResult naive_kb(const FiniteRuleSet& start, size_t max_lhs_len, size_t max_rules) {
  std::vector<Rule> rules;
  std::deque<std::pair<Word, Word>> agenda;
  for (const Rule& r : start.rules) agenda.emplace_back(r.lhs, r.rhs);

  auto reduce_now = [&rules](Word w) { return naive_reduce(FiniteRuleSet{rules}, std::move(w)); };

  auto queue_overlaps = [&agenda](const Rule& a, const Rule& b, bool same) {
    size_t max_len = std::min(a.lhs.size(), b.lhs.size());
    for (size_t len = 1; len <= max_len; ++len) {
      if (same && len == a.lhs.size()) continue;
      if (!std::equal(a.lhs.end() - len, a.lhs.end(), b.lhs.begin())) continue;
      Word left = concat(a.rhs, subword(b.lhs, len, b.lhs.size()));
      Word right = concat(subword(a.lhs, 0, a.lhs.size() - len), b.rhs);
      agenda.emplace_back(std::move(left), std::move(right));
    }
  };

  while (!agenda.empty()) {
    auto [lw, rw] = agenda.front();
    agenda.pop_front();
    Word x = reduce_now(std::move(lw));
    Word y = reduce_now(std::move(rw));
    if (x == y) continue;
    if (shortlex_less(x, y)) std::swap(x, y);
    if (x.size() > max_lhs_len) return {};
    Rule nr{std::move(x), std::move(y)};

    // interreduce: rules whose lhs contains the new lhs go back to the
    // agenda; reducible right-hand sides are rewritten in place
    std::vector<Rule> kept;
    for (Rule& r : rules) {
      if (std::search(r.lhs.begin(), r.lhs.end(), nr.lhs.begin(), nr.lhs.end()) != r.lhs.end()) {
        agenda.emplace_back(r.lhs, r.rhs);
      } else {
        kept.push_back(std::move(r));
      }
    }
    rules = std::move(kept);
    for (Rule& r : rules) r.rhs = naive_reduce(FiniteRuleSet{{nr}}, r.rhs);

    for (const Rule& r : rules) {
      queue_overlaps(nr, r, false);
      queue_overlaps(r, nr, false);
    }
    queue_overlaps(nr, nr, true);
    rules.push_back(std::move(nr));
    if (rules.size() > max_rules) return {};
  }
  NaiveKbResult res;
  res.success = true;
  res.rules.rules = std::move(rules);
  std::sort(res.rules.rules.begin(), res.rules.rules.end(),
            [](const Rule& a, const Rule& b) { return rule_cmp(a, b) == std::strong_ordering::less; });
  return res;
}

// ---- free abelian rank two ----

/// Exponent sums (#x - #X, #y - #Y) for a word over the alphabet
/// x, y, X, Y in any order; names must match exactly.
inline std::pair<long, long> z2_exponents(const Word& w, const Alphabet& a) {
  long ex = 0, ey = 0;
  for (Letter l : w) {
    const std::string& n = a.name(l);
    if (n == "x") ++ex;
    else if (n == "X") --ex;
    else if (n == "y") ++ey;
    else if (n == "Y") --ey;
    else throw std::invalid_argument("not a rank-two abelian alphabet");
  }
  return {ex, ey};
}

/// Shortlex-least word with exponent pair (ex, ey) under the order
/// x < y < X < Y.
inline Word z2_normal_form(long ex, long ey, const Alphabet& a) {
  Letter x = *a.find("x"), y = *a.find("y"), ix = *a.find("X"), iy = *a.find("Y");
  Word w;
  auto rep = [&w](Letter l, long n) { w.insert(w.end(), static_cast<size_t>(n), l); };
  if (ex >= 0 && ey >= 0) {
    rep(x, ex);
    rep(y, ey);
  } else if (ex < 0 && ey >= 0) {
    rep(y, ey);
    rep(ix, -ex);
  } else if (ex >= 0 && ey < 0) {
    rep(x, ex);
    rep(iy, -ey);
  } else {
    rep(ix, -ex);
    rep(iy, -ey);
  }
  return w;
}

inline bool z2_rule_valid(const Rule& r, const Alphabet& a) {
  return z2_exponents(r.lhs, a) == z2_exponents(r.rhs, a);
}

// ---- generic ball-table evaluators ----

/// Exact evaluator for a group given by per-letter element action; builds
/// shortlex-least representatives for every element reachable within a
/// radius.
template <class Elem>
class BallOracle {
 public:
  BallOracle(Elem identity, std::vector<Elem> letter_elems)
      : id_(std::move(identity)), gens_(std::move(letter_elems)) {}

  Elem eval(const Word& w) const {
    Elem e = id_;
    for (Letter l : w) e = mul(e, gens_.at(static_cast<size_t>(l)));
    return e;
  }

  bool equal(const Word& u, const Word& v) const { return eval(u) == eval(v); }

  bool rule_valid(const Rule& r) const { return equal(r.lhs, r.rhs); }

  /// Enumerates all words up to the radius in shortlex order; the first
  /// word reaching each element is its shortlex-least representative.
  void build_table(int radius) {
    table_.clear();
    radius_ = radius;
    table_.emplace(id_, Word{});
    // breadth-first in length, letters in order: visits words in shortlex order
    std::deque<std::pair<Word, Elem>> layer{{Word{}, id_}};
    for (int len = 0; len < radius; ++len) {
      std::deque<std::pair<Word, Elem>> next;
      for (auto& [w, e] : layer) {
        for (Letter l = 0; l < static_cast<Letter>(gens_.size()); ++l) {
          Word w2 = w;
          w2.push_back(l);
          Elem e2 = mul(e, gens_[static_cast<size_t>(l)]);
          table_.emplace(e2, w2);  // keeps the first (shortlex-least) hit
          next.emplace_back(std::move(w2), std::move(e2));
        }
      }
      layer = std::move(next);
    }
  }

  /// Shortlex-least word equal to w; valid for |w| <= table radius.
  Word normal_form(const Word& w) const {
    if (static_cast<int>(w.size()) > radius_) throw std::out_of_range("word longer than the table radius");
    auto it = table_.find(eval(w));
    if (it == table_.end()) throw std::logic_error("element missing from ball table");
    return it->second;
  }

  size_t num_elements() const { return table_.size(); }

 private:
  static Elem mul(const Elem& a, const Elem& b) { return a * b; }

  Elem id_;
  std::vector<Elem> gens_;
  std::map<Elem, Word> table_;
  int radius_ = 0;
};

// ---- finite permutation groups ----

template <int N>
struct Perm {
  std::array<int, N> map;
  friend Perm operator*(const Perm& a, const Perm& b) {
    Perm out;
    for (int i = 0; i < N; ++i) out.map[i] = b.map[a.map[i]];
    return out;
  }
  auto operator<=>(const Perm&) const = default;
};

template <int N>
inline Perm<N> perm_identity() {
  Perm<N> p;
  for (int i = 0; i < N; ++i) p.map[i] = i;
  return p;
}

/// The symmetric group on three points with a = (1 2), b = (1 2 3),
/// matching the presentation <a, A, b, B | a^2, b^3, abab> with letters
/// ordered a, A, b, B.
inline BallOracle<Perm<3>> s3_oracle() {
  Perm<3> a{{1, 0, 2}};
  Perm<3> b{{1, 2, 0}};
  Perm<3> a_inv = a;          // order two
  Perm<3> b_inv = b * b;      // order three
  return BallOracle<Perm<3>>(perm_identity<3>(), {a, a_inv, b, b_inv});
}

// ---- the (2, 3, 7) triangle rotation group ----
//
// Exact arithmetic in Z[t] / (t^3 - t^2 - 2t + 1), where t = 2 cos(pi/7).
// The reflection representation of the (2,3,7) triangle group has integer
// matrices over this ring, is faithful, and restricts faithfully to the
// rotation subgroup generated by the products of adjacent reflections.

struct Zlam {
  // c0 + c1 t + c2 t^2
  long long c0 = 0, c1 = 0, c2 = 0;

  friend Zlam operator+(const Zlam& a, const Zlam& b) { return {a.c0 + b.c0, a.c1 + b.c1, a.c2 + b.c2}; }
  friend Zlam operator-(const Zlam& a, const Zlam& b) { return {a.c0 - b.c0, a.c1 - b.c1, a.c2 - b.c2}; }

  friend Zlam operator*(const Zlam& a, const Zlam& b) {
    // raw degree-4 product, then reduce with t^3 = t^2 + 2t - 1 and
    // t^4 = 3 t^2 + t - 1
    __int128 d0 = (__int128)a.c0 * b.c0;
    __int128 d1 = (__int128)a.c0 * b.c1 + (__int128)a.c1 * b.c0;
    __int128 d2 = (__int128)a.c0 * b.c2 + (__int128)a.c1 * b.c1 + (__int128)a.c2 * b.c0;
    __int128 d3 = (__int128)a.c1 * b.c2 + (__int128)a.c2 * b.c1;
    __int128 d4 = (__int128)a.c2 * b.c2;
    __int128 r0 = d0 - d3 - d4;
    __int128 r1 = d1 + 2 * d3 + d4;
    __int128 r2 = d2 + d3 + 3 * d4;
    auto clamp = [](__int128 v) {
      if (v > INT64_MAX / 4 || v < INT64_MIN / 4) throw std::overflow_error("ring coefficient overflow");
      return static_cast<long long>(v);
    };
    return {clamp(r0), clamp(r1), clamp(r2)};
  }

  auto operator<=>(const Zlam&) const = default;
};

struct Mat3 {
  std::array<Zlam, 9> m;  // row-major

  static Mat3 identity() {
    Mat3 out;
    for (int i = 0; i < 3; ++i) out.m[i * 3 + i] = Zlam{1, 0, 0};
    return out;
  }

  friend Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 out;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Zlam acc;
        for (int k = 0; k < 3; ++k) acc = acc + a.m[i * 3 + k] * b.m[k * 3 + j];
        out.m[i * 3 + j] = acc;
      }
    return out;
  }

  auto operator<=>(const Mat3&) const = default;
};

/// The three reflections of the hyperbolic (2, 3, 7) triangle in its
/// integral reflection representation; Gram entries 2B are 0, -1, -t.
inline std::array<Mat3, 3> triangle237_reflections() {
  const Zlam one{1, 0, 0}, neg1{-1, 0, 0}, t{0, 1, 0};
  Mat3 r1 = Mat3::identity();
  r1.m[0] = neg1;       // e1 -> -e1
  r1.m[0 * 3 + 2] = t;  // e3 -> e3 + t e1
  Mat3 r2 = Mat3::identity();
  r2.m[1 * 3 + 1] = neg1;  // e2 -> -e2
  r2.m[1 * 3 + 2] = one;   // e3 -> e3 + e2
  Mat3 r3 = Mat3::identity();
  r3.m[2 * 3 + 2] = neg1;  // e3 -> -e3
  r3.m[2 * 3 + 0] = t;     // e1 -> e1 + t e3
  r3.m[2 * 3 + 1] = one;   // e2 -> e2 + e3
  return {r1, r2, r3};
}

/// Exact faithful evaluator for <a, A, b, B | a^2, b^3, (ab)^7> with letters
/// ordered a, A, b, B: a and b map to products of adjacent reflections of
/// the hyperbolic (2, 3, 7) triangle.
inline BallOracle<Mat3> triangle237_oracle() {
  auto [r1, r2, r3] = triangle237_reflections();
  Mat3 a = r1 * r2;  // order 2
  Mat3 b = r2 * r3;  // order 3
  Mat3 a_inv = a;
  Mat3 b_inv = b * b;
  return BallOracle<Mat3>(Mat3::identity(), {a, a_inv, b, b_inv});
}

}  // namespace kbweld::oracle
