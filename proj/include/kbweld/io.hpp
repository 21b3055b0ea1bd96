#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kbweld/fsa.hpp"
#include "kbweld/rules.hpp"
#include "kbweld/words.hpp"

namespace kbweld {

struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_no, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

inline std::string strip_comment(const std::string& s) {
  auto pos = s.find('#');
  return pos == std::string::npos ? s : s.substr(0, pos);
}

inline void inverse_token(const std::string& tok, std::vector<std::pair<std::string, std::string>>& pairs);

}  // namespace detail

// ---- presentation files ----
//
// Line-oriented sections:
//   generators: x X y Y
//   inverses: x X y Y          (pairs)
//   order: x y X Y             (the shortlex letter order)
//   relators:
//   xyXY
//
// Relators may sit on the header line or on following lines, one or more
// per line, until the next section header.  '#' starts a comment.

inline Presentation parse_presentation(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;

  std::vector<std::string> generators, order;
  std::vector<std::pair<std::string, std::string>> inverses;
  std::vector<std::pair<int, std::string>> relator_tokens;  // (line, token)
  std::string section;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = detail::strip_comment(raw);
    auto tokens = detail::split_ws(line);
    if (tokens.empty()) continue;
    size_t start = 0;
    if (tokens[0].back() == ':') {
      section = tokens[0].substr(0, tokens[0].size() - 1);
      start = 1;
      if (section != "generators" && section != "inverses" && section != "order" && section != "relators")
        throw ParseError(line_no, "unknown section '" + section + "'");
    }
    if (section.empty()) throw ParseError(line_no, "content before any section header");
    std::vector<std::string> rest(tokens.begin() + start, tokens.end());
    if (section == "generators") {
      generators.insert(generators.end(), rest.begin(), rest.end());
    } else if (section == "order") {
      order.insert(order.end(), rest.begin(), rest.end());
    } else if (section == "inverses") {
      for (auto& t : rest) detail::inverse_token(t, inverses);
    } else {
      for (auto& t : rest) relator_tokens.emplace_back(line_no, t);
    }
  }

  if (generators.empty()) throw ParseError(line_no, "no generators declared");
  if (order.empty()) order = generators;
  if (order.size() != generators.size()) throw ParseError(line_no, "order must list every generator exactly once");

  Alphabet a;
  for (auto& name : order) {
    if (std::find(generators.begin(), generators.end(), name) == generators.end())
      throw ParseError(line_no, "order lists unknown generator '" + name + "'");
    try {
      a.add_letter(name);
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  for (auto& [l, r] : inverses) {
    auto li = a.find(l), ri = a.find(r);
    if (!li || !ri) throw ParseError(line_no, "inverse pair names unknown generator");
    a.set_inverse(*li, *ri);
  }
  if (!a.inverse_closed()) throw ParseError(line_no, "every generator needs an inverse partner");

  Presentation p;
  p.alphabet = a;
  for (auto& [ln, tok] : relator_tokens) {
    try {
      p.relators.push_back(a.parse_word(tok));
    } catch (const std::exception& e) {
      throw ParseError(ln, e.what());
    }
  }
  return p;
}

namespace detail {

// tokens pair up positionally: "inverses: x X y Y"
inline void inverse_token(const std::string& tok, std::vector<std::pair<std::string, std::string>>& pairs) {
  if (!pairs.empty() && pairs.back().second.empty()) {
    pairs.back().second = tok;
  } else {
    pairs.push_back({tok, ""});
  }
}

}  // namespace detail

// ---- automaton text format ----
//
// Shared plain format:
//   fsa <nstates> <nlabels>
//   initial <id>...
//   final <id>...
//   arrow <src> <label> <dst>       (label -1 means epsilon)
//
// Two-variable rule automata extend it with the alphabet and labelled
// arrows/states:
//   generators <name>...
//   inverses <name name>...
//   label2 <src> <x> <y|-> <dst>
//   statelabel <id> <word>
//
// serialize_* output is canonical: breadth-first state numbering from the
// initial state with arrows sorted by (src, label, dst), so isomorphic
// machines serialize identically.

inline std::string serialize_nfa(const Nfa& n) {
  std::ostringstream out;
  out << "fsa " << n.num_states << " " << n.num_labels << "\n";
  out << "initial";
  for (int s : n.initials) out << " " << s;
  out << "\nfinal";
  for (int s : n.finals) out << " " << s;
  out << "\n";
  auto arrows = n.arrows;
  std::sort(arrows.begin(), arrows.end());
  for (auto& a : arrows) out << "arrow " << a.src << " " << a.label << " " << a.dst << "\n";
  return out.str();
}

inline std::string serialize_rule_automaton(const RuleAutomaton& ra) {
  const Alphabet& a = ra.alphabet;
  // canonical renumbering
  CanonicalFsa canon = ra.canonical();
  // recompute the BFS order to carry state labels across
  std::vector<int> order(ra.num_states, -1);
  std::vector<int> bfs{ra.start};
  order[ra.start] = 0;
  for (size_t i = 0; i < bfs.size(); ++i) {
    for (auto& [l, t] : ra.fwd[bfs[i]]) {
      if (order[t] < 0) {
        order[t] = static_cast<int>(bfs.size());
        bfs.push_back(t);
      }
    }
  }
  std::ostringstream out;
  out << "fsa " << canon.num_states << " " << a.num_pair_labels() << "\n";
  out << "generators";
  for (Letter x = 0; x < a.size(); ++x) out << " " << a.name(x);
  out << "\ninverses";
  for (Letter x = 0; x < a.size(); ++x) out << " " << a.name(x) << " " << a.name(a.inverse(x));
  out << "\ninitial 0\nfinal 0\n";
  for (auto& ar : canon.arrows)
    out << "label2 " << ar.src << " " << a.render_letter(a.pair_left(ar.label)) << " "
        << a.render_letter(a.pair_right(ar.label)) << " " << ar.dst << "\n";
  for (int s : bfs)
    if (!ra.labels[s].empty() || s == ra.start)
      out << "statelabel " << order[s] << " " << a.render(ra.labels[s]) << "\n";
  return out.str();
}

struct ParsedAutomaton {
  bool two_variable = false;
  Nfa nfa;                      // always filled
  std::optional<RuleAutomaton> rule_automaton;  // filled for two-variable files
};

inline ParsedAutomaton deserialize_automaton(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  int nstates = -1, nlabels = -1;
  std::vector<std::string> gen_names;
  std::vector<std::pair<std::string, std::string>> inv_pairs;
  std::vector<std::tuple<int, std::string, std::string, int>> label2_arrows;
  std::vector<std::pair<int, std::string>> state_labels;
  Nfa n;
  bool have_header = false;

  auto need_int = [&](const std::string& tok) {
    try {
      size_t used = 0;
      int v = std::stoi(tok, &used);
      if (used != tok.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw ParseError(line_no, "expected an integer, got '" + tok + "'");
    }
  };

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = detail::strip_comment(raw);
    auto t = detail::split_ws(line);
    if (t.empty()) continue;
    const std::string& kw = t[0];
    if (kw == "fsa") {
      if (t.size() != 3) throw ParseError(line_no, "fsa header needs <nstates> <nlabels>");
      nstates = need_int(t[1]);
      nlabels = need_int(t[2]);
      n.num_states = nstates;
      n.num_labels = nlabels;
      have_header = true;
    } else if (!have_header) {
      throw ParseError(line_no, "missing 'fsa' header");
    } else if (kw == "initial" || kw == "final") {
      for (size_t i = 1; i < t.size(); ++i) {
        int s = need_int(t[i]);
        if (s < 0 || s >= nstates) throw ParseError(line_no, "state id out of range");
        (kw == "initial" ? n.initials : n.finals).push_back(s);
      }
    } else if (kw == "arrow") {
      if (t.size() != 4) throw ParseError(line_no, "arrow needs <src> <label> <dst>");
      int src = need_int(t[1]), label = need_int(t[2]), dst = need_int(t[3]);
      if (src < 0 || src >= nstates || dst < 0 || dst >= nstates) throw ParseError(line_no, "state id out of range");
      if (label != kEpsilon && (label < 0 || label >= nlabels)) throw ParseError(line_no, "label out of range");
      n.add_arrow(src, label, dst);
    } else if (kw == "generators") {
      gen_names.assign(t.begin() + 1, t.end());
    } else if (kw == "inverses") {
      if ((t.size() - 1) % 2 != 0) throw ParseError(line_no, "inverses must pair up");
      for (size_t i = 1; i + 1 < t.size(); i += 2) inv_pairs.emplace_back(t[i], t[i + 1]);
    } else if (kw == "label2") {
      if (t.size() != 5) throw ParseError(line_no, "label2 needs <src> <x> <y> <dst>");
      label2_arrows.emplace_back(need_int(t[1]), t[2], t[3], need_int(t[4]));
    } else if (kw == "statelabel") {
      if (t.size() == 2)
        state_labels.emplace_back(need_int(t[1]), "e");
      else if (t.size() == 3)
        state_labels.emplace_back(need_int(t[1]), t[2]);
      else
        throw ParseError(line_no, "statelabel needs <id> <word>");
    } else {
      throw ParseError(line_no, "unknown keyword '" + kw + "'");
    }
  }
  if (!have_header) throw ParseError(line_no, "missing 'fsa' header");

  ParsedAutomaton out;
  if (gen_names.empty() && label2_arrows.empty()) {
    out.nfa = n;
    return out;
  }

  out.two_variable = true;
  Alphabet a(gen_names);
  for (auto& [l, r] : inv_pairs) {
    auto li = a.find(l), ri = a.find(r);
    if (!li || !ri) throw ParseError(line_no, "inverse pair names unknown generator");
    a.set_inverse(*li, *ri);
  }
  if (a.num_pair_labels() != nlabels) throw ParseError(line_no, "label count does not match the alphabet");
  auto letter_of = [&](const std::string& s) -> Letter {
    if (s == "-") return a.pad();
    auto l = a.find(s);
    if (!l) throw ParseError(line_no, "unknown generator '" + s + "'");
    return *l;
  };
  for (auto& [src, xs, ys, dst] : label2_arrows) {
    if (src < 0 || src >= nstates || dst < 0 || dst >= nstates) throw ParseError(line_no, "state id out of range");
    Letter x = letter_of(xs);
    Letter y = letter_of(ys);
    if (x == a.pad()) throw ParseError(line_no, "left letter of a pair label cannot be padding");
    n.add_arrow(src, a.pair_label(x, y), dst);
  }
  out.nfa = n;

  if (n.initials.size() != 1 || n.finals.size() != 1 || n.initials[0] != n.finals[0])
    throw ParseError(line_no, "a rule automaton needs one initial state equal to its final state");

  RuleAutomaton ra;
  ra.alphabet = a;
  ra.num_states = nstates;
  ra.start = n.initials[0];
  ra.fwd.resize(nstates);
  ra.bwd.resize(nstates);
  ra.labels.resize(nstates);
  for (auto& ar : n.arrows) {
    ra.fwd[ar.src].emplace_back(ar.label, ar.dst);
    ra.bwd[ar.dst].emplace_back(ar.label, ar.src);
  }
  for (int s = 0; s < nstates; ++s) {
    std::sort(ra.fwd[s].begin(), ra.fwd[s].end());
    std::sort(ra.bwd[s].begin(), ra.bwd[s].end());
    for (size_t i = 1; i < ra.fwd[s].size(); ++i)
      if (ra.fwd[s][i].first == ra.fwd[s][i - 1].first) throw ParseError(line_no, "rule automaton is not forward-deterministic");
    for (size_t i = 1; i < ra.bwd[s].size(); ++i)
      if (ra.bwd[s][i].first == ra.bwd[s][i - 1].first) throw ParseError(line_no, "rule automaton is not backward-deterministic");
  }
  for (auto& [id, word] : state_labels) {
    if (id < 0 || id >= nstates) throw ParseError(line_no, "statelabel id out of range");
    try {
      ra.labels[id] = a.parse_word(word);
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  out.rule_automaton = std::move(ra);
  return out;
}

}  // namespace kbweld
