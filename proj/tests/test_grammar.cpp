#include <doctest.h>

#include <fstream>
#include <sstream>

#include "gepde/expr.hpp"
#include "gepde/grammar.hpp"
#include "support.hpp"

using namespace gepde;

namespace {

std::uint32_t nt(const Grammar& g, std::string_view name) {
  auto id = g.find_nonterminal(name);
  REQUIRE(id.has_value());
  return *id;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const Genotype kTable{10, 4, 8, 15, 3, 6, 19, 21, 9};

}  // namespace

TEST_CASE("default grammar shape") {
  const Grammar& strict = default_grammar(true);
  CHECK(strict.rule_count(nt(strict, "expr")) == 4);
  CHECK(strict.rule_count(nt(strict, "operand")) == 11);
  CHECK(strict.rule_count(nt(strict, "op")) == 4);
  CHECK(strict.rule_count(nt(strict, "func")) == 9);
  CHECK(strict.rule_count(nt(strict, "var")) == 3);
  CHECK(strict.alternative_text(nt(strict, "operand"), 10) == "<var>");
  CHECK(strict.nonterminal_name(strict.start()) == "expr");

  const Grammar& g = default_grammar();
  CHECK(g.rule_count(nt(g, "operand")) == 12);
  CHECK(g.alternative_text(nt(g, "operand"), 11) == "pi");
  CHECK(g.alternative_text(nt(g, "func"), 5) == "BRF1");
  CHECK(g.alternative_text(nt(g, "expr"), 2) == "<func>(<expr>)");
}

TEST_CASE("shipped grammar files match the built-in grammars") {
  for (bool strict : {false, true}) {
    const std::string path = std::string(GEPDE_SOURCE_DIR) + (strict ? "/grammars/strict.bnf" : "/grammars/default.bnf");
    Grammar file = parse_bnf(read_file(path));
    const Grammar& builtin = default_grammar(strict);
    REQUIRE(file.nonterminal_count() == builtin.nonterminal_count());
    CHECK(file.nonterminal_name(file.start()) == builtin.nonterminal_name(builtin.start()));
    for (std::uint32_t i = 0; i < builtin.nonterminal_count(); ++i) {
      const std::uint32_t j = nt(file, builtin.nonterminal_name(i));
      REQUIRE(file.rule_count(j) == builtin.rule_count(i));
      for (std::size_t a = 0; a < builtin.rule_count(i); ++a) {
        CHECK(file.alternative_text(j, a) == builtin.alternative_text(i, a));
      }
    }
  }
}

TEST_CASE("parse_bnf basics") {
  Grammar g = parse_bnf("<a> ::= x");
  CHECK(g.nonterminal_count() == 1);
  CHECK(g.rule_count(0) == 1);
  CHECK(g.alternative_text(0, 0) == "x");

  Grammar h = parse_bnf(
      "# comment\n"
      "<s> ::= <t>\"+\"<t> | <t>\n"
      "    | f(<s>)\n"
      "<t> ::= a | b  # trailing comment\n");
  CHECK(h.rule_count(nt(h, "s")) == 3);
  CHECK(h.alternative_text(nt(h, "s"), 2) == "f(<s>)");
  CHECK(h.rule_count(nt(h, "t")) == 2);
  const Alternative& first = h.alternatives(nt(h, "s"))[0];
  REQUIRE(first.size() == 3);
  CHECK(first[1].kind == Symbol::Kind::terminal);
  CHECK(h.terminal(first[1].id) == "+");
}

TEST_CASE("parse_bnf errors") {
  CHECK_THROWS_AS(parse_bnf("<a> ::= <b>"), GrammarError);
  CHECK_THROWS_AS(parse_bnf("<a> ::= x\n<a> ::= y"), GrammarError);
  CHECK_THROWS_AS(parse_bnf("<a> ::= x | "), GrammarError);
  CHECK_THROWS_AS(parse_bnf("<a> ::="), GrammarError);
  CHECK_THROWS_AS(parse_bnf(""), GrammarError);
  CHECK_THROWS_AS(parse_bnf("| x"), GrammarError);
  try {
    parse_bnf("<a> ::= x\n\n<c> ::= <d>\n");
    FAIL("expected a grammar error");
  } catch (const GrammarError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("worked mapping example") {
  MappingResult m = map_genotype(kTable, default_grammar(true));
  REQUIRE(m.mapped());
  CHECK(m.phenotype == "sqrt(3*x)");
  CHECK(m.codons_consumed == 9);
  CHECK(m.wraps_used == 0);

  const std::vector<std::string> expected{
      "<expr> 10 mod 4=2 -> <func>(<expr>)",
      "<func> 4 mod 9=4 -> sqrt",
      "<expr> 8 mod 4=0 -> <expr><op><expr>",
      "<expr> 15 mod 4=3 -> <operand>",
      "<operand> 3 mod 11=3 -> 3",
      "<op> 6 mod 4=2 -> *",
      "<expr> 19 mod 4=3 -> <operand>",
      "<operand> 21 mod 11=10 -> <var>",
      "<var> 9 mod 3=0 -> x",
  };
  CHECK(format_trace(m, default_grammar(true)) == expected);

  REQUIRE(m.history.size() == 9);
  CHECK(m.history[0].alternative == 2);
  CHECK(m.history[1].alternative == 4);
  CHECK(m.history[2].alternative == 0);
  for (std::size_t i = 0; i < 9; ++i) CHECK(m.history[i].position == i);
}

TEST_CASE("small mappings") {
  MappingResult five = map_genotype(Genotype{3, 5}, default_grammar(true));
  REQUIRE(five.mapped());
  CHECK(five.phenotype == "5");

  MappingResult zero = map_genotype(Genotype{0}, default_grammar(true));
  CHECK_FALSE(zero.mapped());
  CHECK(zero.wraps_used == 2);

  CHECK_FALSE(map_genotype(Genotype{}, default_grammar()).mapped());

  // 3 -> <operand>, 11 -> pi only exists in the extended grammar.
  CHECK(map_genotype(Genotype{3, 11}, default_grammar()).phenotype == "pi");
  CHECK(map_genotype(Genotype{3, 11}, default_grammar(true)).phenotype == "0");
}

TEST_CASE("wrapping reuses codons from the start") {
  MappingResult w = map_genotype(Genotype{3}, default_grammar(true));
  REQUIRE(w.mapped());
  CHECK(w.phenotype == "3");
  CHECK(w.wraps_used == 1);
  CHECK(w.codons_consumed == 2);

  CHECK_FALSE(map_genotype(Genotype{3}, default_grammar(true), 0).mapped());
}

TEST_CASE("rejection tracks the wrap threshold") {
  // Expands sin(sin(sin(... without end, two codons per level.
  const Genotype g{2, 0};
  for (int threshold = 0; threshold <= 4; ++threshold) {
    MappingResult m = map_genotype(g, default_grammar(true), threshold);
    CHECK_FALSE(m.mapped());
    CHECK(m.wraps_used == threshold);
  }
}

TEST_CASE("mapping is deterministic and phenotypes parse") {
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    Genotype g(50);
    for (Codon& c : g) c = static_cast<Codon>(rng.below(256));
    MappingResult a = map_genotype(g, default_grammar());
    MappingResult b = map_genotype(g, default_grammar());
    CHECK(a.status == b.status);
    CHECK(a.phenotype == b.phenotype);
    CHECK(a.history.size() == b.history.size());
    CHECK(a.codons_consumed == a.history.size());
    if (!a.mapped()) continue;
    CHECK(a.wraps_used <= 2);
    CHECK(a.phenotype.find('<') == std::string::npos);
    CHECK_NOTHROW(parse_expression(a.phenotype));
  }
}

TEST_CASE("shared codon prefixes give shared history prefixes") {
  Rng rng(12);
  int compared = 0;
  for (int i = 0; i < 500; ++i) {
    Genotype a(50);
    for (Codon& c : a) c = static_cast<Codon>(rng.below(256));
    MappingResult ma = map_genotype(a, default_grammar());
    const std::size_t k = std::min<std::size_t>(ma.codons_consumed, a.size()) / 2;
    Genotype b = a;
    for (std::size_t j = k; j < b.size(); ++j) b[j] = static_cast<Codon>(rng.below(256));
    MappingResult mb = map_genotype(b, default_grammar());
    const std::size_t n = std::min({k, ma.history.size(), mb.history.size()});
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(ma.history[j].nonterminal == mb.history[j].nonterminal);
      CHECK(ma.history[j].alternative == mb.history[j].alternative);
    }
    compared += n > 0;
  }
  CHECK(compared > 100);
}
