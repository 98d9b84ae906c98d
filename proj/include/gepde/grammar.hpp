#ifndef GEPDE_GRAMMAR_HPP
#define GEPDE_GRAMMAR_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gepde {

struct Symbol {
  enum class Kind : std::uint8_t { terminal, nonterminal };
  Kind kind;
  std::uint32_t id;  // index into the grammar's terminal or nonterminal table
  bool operator==(const Symbol&) const = default;
};

using Alternative = std::vector<Symbol>;

class GrammarError : public std::runtime_error {
 public:
  GrammarError(const std::string& message, std::size_t line);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A context-free grammar in BNF. Alternatives of each nonterminal are
// numbered 0..R-1 in the order they were written; the first rule defines the
// start symbol.
class Grammar {
 public:
  std::size_t nonterminal_count() const { return nonterminals_.size(); }
  std::size_t terminal_count() const { return terminals_.size(); }
  const std::string& nonterminal_name(std::uint32_t id) const { return nonterminals_[id]; }
  const std::string& terminal(std::uint32_t id) const { return terminals_[id]; }
  std::optional<std::uint32_t> find_nonterminal(std::string_view name) const;
  std::optional<std::uint32_t> find_terminal(std::string_view text) const;

  std::uint32_t start() const { return start_; }
  const std::vector<Alternative>& alternatives(std::uint32_t nonterminal) const {
    return productions_[nonterminal];
  }
  std::size_t rule_count(std::uint32_t nonterminal) const { return productions_[nonterminal].size(); }

  // Right-hand side as written, e.g. "<func>(<expr>)".
  std::string alternative_text(std::uint32_t nonterminal, std::size_t alternative) const;

 private:
  friend Grammar parse_bnf(std::string_view text);

  std::vector<std::string> nonterminals_;  // names without angle brackets
  std::vector<std::string> terminals_;
  std::vector<std::vector<Alternative>> productions_;
  std::uint32_t start_ = 0;
};

// Rules look like `<name> ::= alt | alt ...`; a line starting with `|`
// continues the previous rule. Inside an alternative `<name>` is a
// nonterminal, "quoted text" is a terminal, and any other run of
// non-blank characters is split into terminals at nonterminal boundaries.
// `#` starts a comment.
Grammar parse_bnf(std::string_view text);

// The expression grammar: <expr>, <op>, <operand>, <var>, <func>. Unless
// `strict`, <operand> gets a twelfth alternative `pi` after <var>.
const Grammar& default_grammar(bool strict = false);
std::string_view default_grammar_text(bool strict = false);

using Codon = std::uint32_t;
using Genotype = std::vector<Codon>;

inline constexpr int kDefaultWrapThreshold = 2;

enum class MappingStatus : std::uint8_t { mapped, rejected };

struct RuleChoice {
  std::uint32_t nonterminal;
  std::uint32_t alternative;
  Codon codon;              // value read
  std::uint32_t rule_count; // R at that nonterminal
  std::uint32_t position;   // codon index in the genotype
};

struct MappingResult {
  MappingStatus status = MappingStatus::rejected;
  std::string phenotype;  // only meaningful when mapped
  std::vector<RuleChoice> history;
  std::size_t codons_consumed = 0;
  int wraps_used = 0;

  bool mapped() const { return status == MappingStatus::mapped; }
};

// Leftmost derivation from the start symbol; every expanded nonterminal
// reads one codon V and takes alternative V mod R. Running off the end of the
// genotype wraps to its start; a wrap beyond `wrap_threshold` rejects.
MappingResult map_genotype(std::span<const Codon> genotype, const Grammar& grammar,
                           int wrap_threshold = kDefaultWrapThreshold);

// One line per history entry, e.g. "<expr> 10 mod 4=2 -> <func>(<expr>)".
std::vector<std::string> format_trace(const MappingResult& result, const Grammar& grammar);

}  // namespace gepde

#endif  // GEPDE_GRAMMAR_HPP
