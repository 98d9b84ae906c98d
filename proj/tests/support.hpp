#ifndef GEPDE_TESTS_SUPPORT_HPP
#define GEPDE_TESTS_SUPPORT_HPP

#include <cmath>
#include <optional>
#include <string>

#include "gepde/evolve.hpp"
#include "gepde/expr.hpp"
#include "gepde/grammar.hpp"

namespace gepde::testing {

// Random phenotype from the default grammar: uniform codons, rejected
// mappings are redrawn.
inline Expr random_grammar_expression(Rng& rng, std::size_t length = 50) {
  for (;;) {
    Genotype g(length);
    for (Codon& c : g) c = static_cast<Codon>(rng.below(256));
    MappingResult m = map_genotype(g, default_grammar());
    if (m.mapped()) return parse_expression(m.phenotype);
  }
}

// Central difference of e along v at `point`.
inline std::optional<double> central_difference(const Expr& e, Binding point, Var v, double h) {
  const double at = point.get(v);
  const EvalOutcome hi = evaluate(e, point.set(v, at + h));
  const EvalOutcome lo = evaluate(e, point.set(v, at - h));
  if (!hi.finite || !lo.finite) return std::nullopt;
  return (hi.value - lo.value) / (2.0 * h);
}

inline bool close(double a, double b, double rel, double abs) {
  return std::abs(a - b) <= std::max(abs, rel * std::max(std::abs(a), std::abs(b)));
}

}  // namespace gepde::testing

#endif  // GEPDE_TESTS_SUPPORT_HPP
