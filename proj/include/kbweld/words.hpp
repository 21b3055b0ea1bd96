#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kbweld {

// A letter is an index into an Alphabet; the index order *is* the letter
// order used by the shortlex comparison.
using Letter = int;
using Word = std::vector<Letter>;

/// An ordered set of named generators closed under a formal-inverse
/// involution.  Letters are dense indices, so comparisons and arrow tables
/// stay constant-time.  The reserved index size() acts as the padding
/// symbol of the two-variable label space.
class Alphabet {
 public:
  Alphabet() = default;

  explicit Alphabet(std::vector<std::string> names) {
    for (auto& n : names) add_letter(n);
  }

  Letter add_letter(const std::string& name) {
    if (name.empty()) throw std::invalid_argument("empty generator name");
    if (index_.count(name)) throw std::invalid_argument("duplicate generator name: " + name);
    Letter id = static_cast<Letter>(names_.size());
    names_.push_back(name);
    inv_.push_back(-1);
    index_.emplace(name, id);
    return id;
  }

  void set_inverse(Letter a, Letter b) {
    check(a);
    check(b);
    inv_[a] = b;
    inv_[b] = a;
  }

  int size() const { return static_cast<int>(names_.size()); }

  Letter inverse(Letter a) const {
    check(a);
    if (inv_[a] < 0) throw std::logic_error("generator has no inverse: " + names_[a]);
    return inv_[a];
  }

  bool inverse_closed() const {
    for (Letter i = 0; i < size(); ++i) {
      if (inv_[i] < 0 || inv_[inv_[i]] != i) return false;
    }
    return true;
  }

  const std::string& name(Letter a) const {
    check(a);
    return names_[a];
  }

  std::optional<Letter> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // ---- two-variable label space: pairs (x, y) with x in A, y in A + pad ----

  Letter pad() const { return size(); }

  int pair_label(Letter x, Letter y) const { return x * (size() + 1) + y; }

  Letter pair_left(int label) const { return label / (size() + 1); }

  Letter pair_right(int label) const { return label % (size() + 1); }

  int num_pair_labels() const { return size() * (size() + 1); }

  // ---- rendering and parsing ----

  bool single_char_names() const {
    for (auto& n : names_)
      if (n.size() != 1) return false;
    return true;
  }

  std::string render_letter(Letter a) const {
    if (a == pad()) return "-";
    check(a);
    return names_[a];
  }

  // The empty word renders as "e"; single-character generator names are
  // concatenated, longer names are joined with '*'.
  std::string render(const Word& w) const {
    if (w.empty()) return "e";
    std::string out;
    bool concat = single_char_names();
    for (size_t i = 0; i < w.size(); ++i) {
      if (!concat && i > 0) out += '*';
      out += render_letter(w[i]);
    }
    return out;
  }

  Word parse_word(std::string_view text) const {
    Word w;
    if (text == "e" && !find("e")) return w;
    if (text.find('*') != std::string_view::npos) {
      size_t pos = 0;
      while (pos <= text.size()) {
        size_t next = text.find('*', pos);
        std::string_view tok = text.substr(pos, next == std::string_view::npos ? next : next - pos);
        if (tok.empty()) throw std::invalid_argument("empty generator in word");
        auto l = find(tok);
        if (!l) throw std::invalid_argument("unknown generator: " + std::string(tok));
        w.push_back(*l);
        if (next == std::string_view::npos) break;
        pos = next + 1;
      }
      return w;
    }
    if (single_char_names()) {
      for (char c : text) {
        auto l = find(std::string_view(&c, 1));
        if (!l) throw std::invalid_argument(std::string("unknown generator: ") + c);
        w.push_back(*l);
      }
      return w;
    }
    auto l = find(text);
    if (!l) throw std::invalid_argument("unknown generator: " + std::string(text) + " (use '*' between multi-character names)");
    w.push_back(*l);
    return w;
  }

 private:
  void check(Letter a) const {
    if (a < 0 || a >= size()) throw std::out_of_range("letter index out of range");
  }

  std::vector<std::string> names_;
  std::vector<Letter> inv_;
  std::map<std::string, Letter> index_;
};

// ---- shortlex ordering ----

inline std::strong_ordering shortlex_cmp(const Word& u, const Word& v) {
  if (u.size() != v.size()) return u.size() <=> v.size();
  for (size_t i = 0; i < u.size(); ++i) {
    if (u[i] != v[i]) return u[i] <=> v[i];
  }
  return std::strong_ordering::equal;
}

inline bool shortlex_less(const Word& u, const Word& v) {
  return shortlex_cmp(u, v) == std::strong_ordering::less;
}

inline bool shortlex_greater(const Word& u, const Word& v) {
  return shortlex_cmp(u, v) == std::strong_ordering::greater;
}

/// A rewrite rule (lhs, rhs).  While held in the store outside the
/// minimization routine, lhs is shortlex-greater than rhs.
struct Rule {
  Word lhs;
  Word rhs;
  bool operator==(const Rule&) const = default;
  bool trivial() const { return lhs.empty() && rhs.empty(); }
  size_t total_length() const { return lhs.size() + rhs.size(); }
};

// Pairs ordered by lhs first, ties broken by rhs.
inline std::strong_ordering rule_cmp(const Rule& a, const Rule& b) {
  auto c = shortlex_cmp(a.lhs, b.lhs);
  if (c != std::strong_ordering::equal) return c;
  return shortlex_cmp(a.rhs, b.rhs);
}

// ---- padded pairs ----

// One symbol per position; the shorter projection is padded at the tail.
using PaddedPair = std::vector<std::pair<Letter, Letter>>;

inline PaddedPair pad(const Word& u, const Word& v, const Alphabet& a) {
  PaddedPair out;
  size_t n = std::max(u.size(), v.size());
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    Letter x = i < u.size() ? u[i] : a.pad();
    Letter y = i < v.size() ? v[i] : a.pad();
    out.emplace_back(x, y);
  }
  return out;
}

inline std::pair<Word, Word> unpad(const PaddedPair& p, const Alphabet& a) {
  Word u, v;
  for (auto& [x, y] : p) {
    if (x == a.pad() && y == a.pad()) throw std::invalid_argument("padded pair contains (pad, pad)");
    if (x != a.pad()) u.push_back(x);
    if (y != a.pad()) v.push_back(y);
  }
  // pad must be a contiguous tail of at most one projection
  PaddedPair again = pad(u, v, a);
  if (again != p) throw std::invalid_argument("malformed padded pair");
  return {u, v};
}

// ---- free group utilities ----

inline Word formal_inverse(const Word& w, const Alphabet& a) {
  Word out;
  out.reserve(w.size());
  for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(a.inverse(*it));
  return out;
}

inline Word free_reduce(const Word& w, const Alphabet& a) {
  Word out;
  out.reserve(w.size());
  for (Letter x : w) {
    if (!out.empty() && a.inverse(out.back()) == x) {
      out.pop_back();
    } else {
      out.push_back(x);
    }
  }
  return out;
}

inline Word cyclic_reduce(const Word& w, const Alphabet& a) {
  Word out = free_reduce(w, a);
  while (out.size() >= 2 && a.inverse(out.front()) == out.back()) {
    out.erase(out.begin());
    out.pop_back();
  }
  return out;
}

/// True iff (u, v) has the shape every stored rule must have: no common
/// prefix, u shortlex-greater than v, and u at most two letters longer.
inline bool is_admissible_rule_pair(const Word& u, const Word& v) {
  if (!u.empty() && !v.empty() && u.front() == v.front()) return false;
  if (!shortlex_greater(u, v)) return false;
  return v.size() <= u.size() && u.size() <= v.size() + 2;
}

/// Turns a relator into an oriented rule: cyclically reduce, split at the
/// midpoint (left half one letter longer when the length is odd), invert the
/// tail, orient, and strip any common prefix/suffix.  Relators that reduce
/// to the empty word yield no rule.
inline std::optional<Rule> relator_to_rule(const Word& relator, const Alphabet& a) {
  Word w = cyclic_reduce(relator, a);
  if (w.empty()) return std::nullopt;
  size_t n = w.size();
  size_t k = (n + 1) / 2;
  Word l(w.begin(), w.begin() + k);
  Word s(w.begin() + k, w.end());
  Word r = formal_inverse(s, a);
  if (shortlex_less(l, r)) std::swap(l, r);
  while (!l.empty() && !r.empty() && l.front() == r.front()) {
    l.erase(l.begin());
    r.erase(r.begin());
  }
  while (!l.empty() && !r.empty() && l.back() == r.back()) {
    l.pop_back();
    r.pop_back();
  }
  if (l == r) return std::nullopt;
  if (shortlex_less(l, r)) std::swap(l, r);
  return Rule{std::move(l), std::move(r)};
}

inline Word concat(const Word& u, const Word& v) {
  Word out = u;
  out.insert(out.end(), v.begin(), v.end());
  return out;
}

inline Word subword(const Word& w, size_t begin, size_t end) {
  return Word(w.begin() + begin, w.begin() + end);
}

}  // namespace kbweld
