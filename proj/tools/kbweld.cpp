// Command-line front end: run completion on a presentation, reduce words
// against a saved rule automaton, weld automata, enumerate rules, and
// cross-check against brute-force completion.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kbweld/io.hpp"
#include "kbweld/kb.hpp"
#include "kbweld/oracle.hpp"
#include "kbweld/reduction.hpp"
#include "kbweld/welding.hpp"

using namespace kbweld;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitLimit = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RuleAutomaton load_rule_automaton(const std::string& path) {
  ParsedAutomaton parsed = deserialize_automaton(read_file(path));
  if (!parsed.rule_automaton) throw std::runtime_error(path + " is not a two-variable rule automaton");
  return std::move(*parsed.rule_automaton);
}

std::vector<Rule> seed_rules(const Presentation& p) {
  std::vector<Rule> seeds;
  for (Letter x = 0; x < p.alphabet.size(); ++x) {
    Rule sp{Word{x, p.alphabet.inverse(x)}, Word{}};
    if (std::find(seeds.begin(), seeds.end(), sp) == seeds.end()) seeds.push_back(sp);
  }
  for (const Word& rel : p.relators) {
    if (auto r = relator_to_rule(rel, p.alphabet)) {
      if (std::find(seeds.begin(), seeds.end(), *r) == seeds.end()) seeds.push_back(*r);
    }
  }
  return seeds;
}

int cmd_run(const std::string& file, const KbLimits& limits, const std::string& out_path, bool log) {
  Presentation p = parse_presentation(read_file(file));
  KbDriver driver(p, limits);
  RunResult res = driver.run([log](const KbDriver&, const PassReport& rep) {
    if (log) std::cout << rep.line() << "\n";
  });
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << serialize_rule_automaton(res.rules);
  }
  std::cout << (res.stabilized() ? "stabilized" : "limit reached") << " after " << res.passes
            << " passes, " << res.rules.num_states << " states, " << res.rules.num_arrows()
            << " arrows\n";
  return res.stabilized() ? kExitOk : kExitLimit;
}

int cmd_reduce(const std::string& rules_path, const std::vector<std::string>& words) {
  RuleAutomaton ra = load_rule_automaton(rules_path);
  ReductionEngine engine(ra);
  for (const std::string& text : words) {
    Word w = ra.alphabet.parse_word(text);
    std::cout << ra.alphabet.render(engine.reduce_word(w)) << "\n";
  }
  return kExitOk;
}

int cmd_weld(const std::string& path) {
  ParsedAutomaton parsed = deserialize_automaton(read_file(path));
  Nfa trimmed = trim(parsed.nfa);
  Pdfa welded = weld(trimmed);
  CanonicalFsa canon = canonical_form(welded);
  Nfa out;
  out.num_states = canon.num_states;
  out.num_labels = welded.num_labels;
  out.arrows = canon.arrows;
  out.initials = {0};
  out.finals = canon.finals;
  std::cout << serialize_nfa(out);
  return kExitOk;
}

int cmd_enumerate(const std::string& rules_path, int max_len) {
  RuleAutomaton ra = load_rule_automaton(rules_path);
  for (const Rule& r : enumerate_rules(ra, max_len))
    std::cout << ra.alphabet.render(r.lhs) << " -> " << ra.alphabet.render(r.rhs) << "\n";
  return kExitOk;
}

int cmd_verify(const std::string& rules_path, const std::string& pres_path, int radius) {
  RuleAutomaton ra = load_rule_automaton(rules_path);
  Presentation p = parse_presentation(read_file(pres_path));
  oracle::FiniteRuleSet start;
  start.rules = seed_rules(p);
  size_t max_lhs = std::max(2 * radius + 4, 16);
  oracle::NaiveKbResult oracle_rules = oracle::naive_kb(start, max_lhs, 50000);
  if (!oracle_rules.success) {
    std::cout << "oracle incomplete: brute-force completion exceeded its bounds\n";
    return kExitLimit;
  }
  ReductionEngine engine(ra);
  long mismatches = 0, checked = 0;
  std::vector<Word> layer{Word{}};
  for (int len = 0; len <= radius; ++len) {
    for (const Word& w : layer) {
      ++checked;
      Word got = engine.reduce_word(w);
      Word want = oracle::naive_reduce(oracle_rules.rules, w);
      if (got != want) {
        if (++mismatches <= 10)
          std::cout << "mismatch: " << p.alphabet.render(w) << " -> " << p.alphabet.render(got)
                    << ", oracle " << p.alphabet.render(want) << "\n";
      }
    }
    if (len == radius) break;
    std::vector<Word> next;
    next.reserve(layer.size() * p.alphabet.size());
    for (const Word& w : layer)
      for (Letter l = 0; l < p.alphabet.size(); ++l) {
        Word w2 = w;
        w2.push_back(l);
        next.push_back(std::move(w2));
      }
    layer = std::move(next);
  }
  std::cout << checked << " words checked, " << mismatches << " mismatches\n";
  return mismatches == 0 ? kExitOk : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knuth-Bendix completion over welded two-variable rule automata"};
  app.require_subcommand(1);

  std::string file, out_path, rules_path, pres_path;
  std::vector<std::string> words;
  bool log = false;
  int max_len = 10, radius = 4;
  KbLimits limits;

  auto* run = app.add_subcommand("run", "run completion on a presentation file");
  run->add_option("file", file, "presentation file")->required();
  run->add_option("--max-passes", limits.max_passes, "pass limit");
  run->add_option("--max-states", limits.max_wdiff_states, "word-difference state limit");
  run->add_option("--max-rules", limits.max_rules, "stored rule limit");
  run->add_flag("--log", log, "print one report line per pass");
  run->add_option("--out", out_path, "write the stabilized rule automaton here");

  auto* reduce = app.add_subcommand("reduce", "reduce words against a saved rule automaton");
  reduce->add_option("--rules", rules_path, "rule automaton file")->required();
  reduce->add_option("words", words, "words to reduce ('*' joins multi-character names)")->required();

  auto* weld_cmd = app.add_subcommand("weld", "weld an automaton file and print the canonical result");
  weld_cmd->add_option("file", file, "automaton file")->required();

  auto* enumerate = app.add_subcommand("enumerate", "list rules up to a total length");
  enumerate->add_option("--rules", rules_path, "rule automaton file")->required();
  enumerate->add_option("--max-len", max_len, "bound on |lhs| + |rhs|");

  auto* verify = app.add_subcommand("verify", "cross-check reduction against brute-force completion");
  verify->add_option("--rules", rules_path, "rule automaton file")->required();
  verify->add_option("--presentation", pres_path, "presentation file")->required();
  verify->add_option("--radius", radius, "check every word up to this length");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(file, limits, out_path, log);
    if (reduce->parsed()) return cmd_reduce(rules_path, words);
    if (weld_cmd->parsed()) return cmd_weld(file);
    if (enumerate->parsed()) return cmd_enumerate(rules_path, max_len);
    if (verify->parsed()) return cmd_verify(rules_path, pres_path, radius);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
