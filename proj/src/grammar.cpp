#include "gepde/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace gepde {

GrammarError::GrammarError(const std::string& message, std::size_t line)
    : std::runtime_error("grammar line " + std::to_string(line) + ": " + message), line_(line) {}

std::optional<std::uint32_t> Grammar::find_nonterminal(std::string_view name) const {
  auto it = std::find(nonterminals_.begin(), nonterminals_.end(), name);
  if (it == nonterminals_.end()) return std::nullopt;
  return static_cast<std::uint32_t>(it - nonterminals_.begin());
}

std::optional<std::uint32_t> Grammar::find_terminal(std::string_view text) const {
  auto it = std::find(terminals_.begin(), terminals_.end(), text);
  if (it == terminals_.end()) return std::nullopt;
  return static_cast<std::uint32_t>(it - terminals_.begin());
}

std::string Grammar::alternative_text(std::uint32_t nonterminal, std::size_t alternative) const {
  std::string out;
  for (const Symbol& s : productions_[nonterminal][alternative]) {
    if (s.kind == Symbol::Kind::nonterminal) {
      out += '<';
      out += nonterminals_[s.id];
      out += '>';
    } else {
      out += terminals_[s.id];
    }
  }
  return out;
}

namespace {

struct RawSymbol {
  bool nonterminal;
  std::string text;
  std::size_t line;
};

using RawAlternative = std::vector<RawSymbol>;

struct RawRule {
  std::string name;
  std::size_t line;
  std::vector<RawAlternative> alternatives;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Drops a trailing comment, respecting quoted terminals.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string parse_nonterminal_name(std::string_view s, std::size_t& i, std::size_t line) {
  const std::size_t close = s.find('>', i);
  if (close == std::string_view::npos) throw GrammarError("unterminated nonterminal", line);
  std::string name(trim(s.substr(i + 1, close - i - 1)));
  if (name.empty()) throw GrammarError("empty nonterminal name", line);
  i = close + 1;
  return name;
}

// Splits the right-hand side text into alternatives of symbols.
void parse_alternatives(std::string_view rhs, std::size_t line, RawRule& rule) {
  RawAlternative current;
  bool saw_any = false;
  auto finish = [&] {
    if (current.empty()) throw GrammarError("empty alternative in <" + rule.name + ">", line);
    rule.alternatives.push_back(std::move(current));
    current.clear();
  };
  std::size_t i = 0;
  while (i < rhs.size()) {
    const char c = rhs[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '|') {
      finish();
      ++i;
    } else if (c == '<') {
      current.push_back({true, parse_nonterminal_name(rhs, i, line), line});
      saw_any = true;
    } else if (c == '"') {
      const std::size_t close = rhs.find('"', i + 1);
      if (close == std::string_view::npos) throw GrammarError("unterminated quoted terminal", line);
      current.push_back({false, std::string(rhs.substr(i + 1, close - i - 1)), line});
      i = close + 1;
      saw_any = true;
    } else {
      const std::size_t begin = i;
      while (i < rhs.size() && !std::isspace(static_cast<unsigned char>(rhs[i])) && rhs[i] != '<' &&
             rhs[i] != '|' && rhs[i] != '"') {
        ++i;
      }
      current.push_back({false, std::string(rhs.substr(begin, i - begin)), line});
      saw_any = true;
    }
  }
  if (!saw_any && rule.alternatives.empty()) {
    throw GrammarError("no alternatives for <" + rule.name + ">", line);
  }
  finish();
}

}  // namespace

Grammar parse_bnf(std::string_view text) {
  std::vector<RawRule> rules;
  std::size_t line_no = 0;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = trim(strip_comment(text.substr(begin, end - begin)));
    begin = end + 1;
    if (line.empty()) continue;

    if (line.front() == '|') {
      if (rules.empty()) throw GrammarError("continuation line without a rule", line_no);
      RawRule& rule = rules.back();
      RawRule extra{rule.name, line_no, {}};
      parse_alternatives(line.substr(1), line_no, extra);
      for (auto& alt : extra.alternatives) rule.alternatives.push_back(std::move(alt));
      continue;
    }

    if (line.front() != '<') throw GrammarError("expected '<name> ::='", line_no);
    std::size_t i = 0;
    std::string name = parse_nonterminal_name(line, i, line_no);
    std::string_view rest = trim(line.substr(i));
    if (rest.substr(0, 3) != "::=") throw GrammarError("expected '::=' after <" + name + ">", line_no);
    for (const RawRule& r : rules) {
      if (r.name == name) throw GrammarError("duplicate definition of <" + name + ">", line_no);
    }
    RawRule rule{name, line_no, {}};
    parse_alternatives(rest.substr(3), line_no, rule);
    rules.push_back(std::move(rule));
  }
  if (rules.empty()) throw GrammarError("grammar defines no rules", line_no);

  Grammar g;
  for (const RawRule& r : rules) g.nonterminals_.push_back(r.name);
  std::map<std::string, std::uint32_t> terminal_ids;
  g.productions_.resize(rules.size());
  for (std::size_t n = 0; n < rules.size(); ++n) {
    for (const RawAlternative& raw : rules[n].alternatives) {
      Alternative alt;
      for (const RawSymbol& s : raw) {
        if (s.nonterminal) {
          auto id = g.find_nonterminal(s.text);
          if (!id) throw GrammarError("undefined nonterminal <" + s.text + ">", s.line);
          alt.push_back({Symbol::Kind::nonterminal, *id});
        } else {
          auto [it, inserted] =
              terminal_ids.try_emplace(s.text, static_cast<std::uint32_t>(g.terminals_.size()));
          if (inserted) g.terminals_.push_back(s.text);
          alt.push_back({Symbol::Kind::terminal, it->second});
        }
      }
      g.productions_[n].push_back(std::move(alt));
    }
  }
  g.start_ = 0;
  return g;
}

namespace {

constexpr std::string_view kGrammarHead = R"(# Expression grammar. The first rule defines the start symbol.
<expr>    ::= <expr><op><expr>
            | (<expr>)
            | <func>(<expr>)
            | <operand>
<var>     ::= x | y | z
)";

constexpr std::string_view kOperandStrict =
    "<operand> ::= 0 | 1 | 2 | 3 | 4 | 5 | 6 | 7 | 8 | 9 | <var>\n";
constexpr std::string_view kOperandExtended =
    "<operand> ::= 0 | 1 | 2 | 3 | 4 | 5 | 6 | 7 | 8 | 9 | <var> | pi\n";

constexpr std::string_view kGrammarTail = R"(<op>      ::= + | - | * | /
<func>    ::= sin | cos | exp | log | sqrt | BRF1 | BRF2 | BRF3 | BRF4
)";

const std::string& grammar_text(bool strict) {
  static const std::string extended =
      std::string(kGrammarHead) + std::string(kOperandExtended) + std::string(kGrammarTail);
  static const std::string plain =
      std::string(kGrammarHead) + std::string(kOperandStrict) + std::string(kGrammarTail);
  return strict ? plain : extended;
}

}  // namespace

std::string_view default_grammar_text(bool strict) { return grammar_text(strict); }

const Grammar& default_grammar(bool strict) {
  static const Grammar extended = parse_bnf(grammar_text(false));
  static const Grammar plain = parse_bnf(grammar_text(true));
  return strict ? plain : extended;
}

MappingResult map_genotype(std::span<const Codon> genotype, const Grammar& grammar,
                           int wrap_threshold) {
  MappingResult result;
  const std::size_t length = genotype.size();
  std::vector<Symbol> pending{{Symbol::Kind::nonterminal, grammar.start()}};
  std::size_t pos = 0;
  while (!pending.empty()) {
    const Symbol sym = pending.back();
    pending.pop_back();
    if (sym.kind == Symbol::Kind::terminal) {
      result.phenotype += grammar.terminal(sym.id);
      continue;
    }
    if (pos == length) {
      if (length == 0 || result.wraps_used >= wrap_threshold) {
        result.status = MappingStatus::rejected;
        result.phenotype.clear();
        return result;
      }
      ++result.wraps_used;
      pos = 0;
    }
    const Codon codon = genotype[pos];
    const auto rules = static_cast<std::uint32_t>(grammar.rule_count(sym.id));
    const std::uint32_t choice = codon % rules;
    result.history.push_back({sym.id, choice, codon, rules, static_cast<std::uint32_t>(pos)});
    ++pos;
    ++result.codons_consumed;
    const Alternative& alt = grammar.alternatives(sym.id)[choice];
    for (auto it = alt.rbegin(); it != alt.rend(); ++it) pending.push_back(*it);
  }
  result.status = MappingStatus::mapped;
  return result;
}

std::vector<std::string> format_trace(const MappingResult& result, const Grammar& grammar) {
  std::vector<std::string> lines;
  lines.reserve(result.history.size());
  for (const RuleChoice& c : result.history) {
    lines.push_back("<" + grammar.nonterminal_name(c.nonterminal) + "> " + std::to_string(c.codon) +
                    " mod " + std::to_string(c.rule_count) + "=" + std::to_string(c.alternative) +
                    " -> " + grammar.alternative_text(c.nonterminal, c.alternative));
  }
  return lines;
}

}  // namespace gepde
