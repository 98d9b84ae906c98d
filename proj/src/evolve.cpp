#include "gepde/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace gepde {

std::size_t Rng::below(std::size_t n) {
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r = engine_();
  while (r >= limit) r = engine_();
  return static_cast<std::size_t>(r % bound);
}

void GaConfig::validate() const {
  auto bad = [](const std::string& what) { throw std::invalid_argument(what); };
  if (population_size < 2) bad("population_size must be at least 2");
  if (chromosome_length < 1) bad("chromosome_length must be positive");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) bad("crossover_rate must lie in [0, 1]");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) bad("mutation_rate must lie in [0, 1]");
  if (tournament_size < 2 || tournament_size > population_size) {
    bad("tournament_size must lie in [2, population_size]");
  }
  if (elite_count >= population_size) bad("elite_count must be below population_size");
  if (wrap_threshold < 0) bad("wrap_threshold must be non-negative");
  if (!(rbf_shape > 0.0)) bad("rbf_shape must be positive");
  if (threads < 1) bad("threads must be positive");
}

Scorer::Scorer(const Grammar& grammar, const FitnessEvaluator& evaluator, const GaConfig& config)
    : grammar_(grammar),
      evaluator_(evaluator),
      wrap_threshold_(config.wrap_threshold),
      parse_options_{config.rbf_shape},
      threads_(config.threads) {}

FitnessReport Scorer::score(const std::string& phenotype) const {
  std::optional<Expr> candidate;
  try {
    candidate = parse_expression(phenotype, parse_options_);
  } catch (const ParseError&) {
    return evaluator_.rejected();
  }
  if ((variables(*candidate) & ~evaluator_.problem().spatial_vars()).any()) return evaluator_.rejected();
  return evaluator_.evaluate(*candidate);
}

Individual Scorer::make(Genotype genotype) {
  Population p = make_all({std::move(genotype)});
  return std::move(p.front());
}

Population Scorer::make_all(std::vector<Genotype> genotypes) {
  constexpr std::size_t kMemoLimit = 1u << 18;
  Population out(genotypes.size());
  std::unordered_map<std::string, std::size_t> fresh_index;
  std::vector<std::string> fresh;
  std::vector<std::pair<std::size_t, std::size_t>> waiting;  // (individual, fresh slot)
  for (std::size_t i = 0; i < genotypes.size(); ++i) {
    out[i].genotype = std::move(genotypes[i]);
    out[i].mapping = map_genotype(out[i].genotype, grammar_, wrap_threshold_);
    if (!out[i].mapping.mapped()) {
      out[i].fitness = evaluator_.rejected();
      continue;
    }
    const std::string& ph = out[i].mapping.phenotype;
    if (auto it = memo_.find(ph); it != memo_.end()) {
      out[i].fitness = it->second;
      continue;
    }
    auto [it, inserted] = fresh_index.try_emplace(ph, fresh.size());
    if (inserted) fresh.push_back(ph);
    waiting.emplace_back(i, it->second);
  }

  std::vector<FitnessReport> reports(fresh.size());
  const std::size_t workers = std::min<std::size_t>(threads_, fresh.size());
  if (workers <= 1) {
    for (std::size_t k = 0; k < fresh.size(); ++k) reports[k] = score(fresh[k]);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < fresh.size(); k += workers) reports[k] = score(fresh[k]);
      });
    }
    for (auto& t : pool) t.join();
  }

  for (const auto& [i, k] : waiting) out[i].fitness = reports[k];
  if (memo_.size() + fresh.size() > kMemoLimit) memo_.clear();
  for (std::size_t k = 0; k < fresh.size(); ++k) memo_.emplace(std::move(fresh[k]), std::move(reports[k]));
  return out;
}

Population init_population(const GaConfig& config, Scorer& scorer, Rng& rng) {
  std::vector<Genotype> genotypes(config.population_size, Genotype(config.chromosome_length));
  for (Genotype& g : genotypes) {
    for (Codon& c : g) c = static_cast<Codon>(rng.below(static_cast<std::size_t>(config.codon_max) + 1));
  }
  return scorer.make_all(std::move(genotypes));
}

std::size_t best_index(const Population& population) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < population.size(); ++i) {
    if (population[i].total() < population[best].total()) best = i;
  }
  return best;
}

std::vector<std::size_t> elite_indices(const Population& population, std::size_t count) {
  std::vector<std::size_t> order(population.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  count = std::min(count, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (population[a].total() != population[b].total()) {
                        return population[a].total() < population[b].total();
                      }
                      return a < b;
                    });
  order.resize(count);
  return order;
}

std::size_t tournament(const Population& population, std::size_t size, Rng& rng) {
  std::vector<std::size_t> drawn;
  drawn.reserve(size);
  while (drawn.size() < size) {
    const std::size_t i = rng.below(population.size());
    if (std::find(drawn.begin(), drawn.end(), i) == drawn.end()) drawn.push_back(i);
  }
  std::size_t winner = drawn.front();
  for (std::size_t i : drawn) {
    if (population[i].total() < population[winner].total()) winner = i;
  }
  return winner;
}

std::vector<std::size_t> select(const Population& population, const GaConfig& config, Rng& rng) {
  const std::size_t pool = population.size() - std::min(config.elite_count, population.size());
  std::vector<std::size_t> parents;
  parents.reserve(pool);
  for (std::size_t i = 0; i < pool; ++i) parents.push_back(tournament(population, config.tournament_size, rng));
  return parents;
}

std::size_t common_history_prefix(const std::vector<RuleChoice>& a, const std::vector<RuleChoice>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  std::size_t k = 0;
  while (k < n && a[k].nonterminal == b[k].nonterminal && a[k].alternative == b[k].alternative) ++k;
  return k;
}

std::pair<Genotype, Genotype> exchange_segments(const Genotype& a, const Genotype& b, std::size_t start,
                                                std::size_t end_a, std::size_t end_b) {
  auto ia = [&](std::size_t i) { return a.begin() + static_cast<std::ptrdiff_t>(i); };
  auto ib = [&](std::size_t i) { return b.begin() + static_cast<std::ptrdiff_t>(i); };
  Genotype c1(a.begin(), ia(start));
  c1.insert(c1.end(), ib(start), ib(end_b));
  c1.insert(c1.end(), ia(end_a), a.end());
  Genotype c2(b.begin(), ib(start));
  c2.insert(c2.end(), ia(start), ia(end_a));
  c2.insert(c2.end(), ib(end_b), b.end());

  if (c1.size() > a.size()) {
    c2.insert(c2.end(), c1.begin() + static_cast<std::ptrdiff_t>(a.size()), c1.end());
    c1.resize(a.size());
  } else if (c2.size() > b.size()) {
    c1.insert(c1.end(), c2.begin() + static_cast<std::ptrdiff_t>(b.size()), c2.end());
    c2.resize(b.size());
  }
  return {std::move(c1), std::move(c2)};
}

namespace {

// Nearest index in [lo, hi) to `from` whose history entry expands
// `nonterminal`; lower index first on equal distance.
std::optional<std::size_t> nearest_same_kind(const std::vector<RuleChoice>& h, std::size_t lo,
                                             std::size_t hi, std::size_t from, std::uint32_t nonterminal) {
  for (std::size_t d = 0; d < hi - lo; ++d) {
    if (from >= lo + d && h[from - d].nonterminal == nonterminal) return from - d;
    if (d > 0 && from + d < hi && h[from + d].nonterminal == nonterminal) return from + d;
  }
  return std::nullopt;
}

}  // namespace

std::pair<Genotype, Genotype> crossover_two_point(const Genotype& a, const Genotype& b, Rng& rng) {
  const std::size_t len = std::min(a.size(), b.size());
  std::size_t i = rng.below(len + 1);
  std::size_t j = rng.below(len + 1);
  if (i > j) std::swap(i, j);
  Genotype c1 = a;
  Genotype c2 = b;
  std::swap_ranges(c1.begin() + static_cast<std::ptrdiff_t>(i), c1.begin() + static_cast<std::ptrdiff_t>(j),
                   c2.begin() + static_cast<std::ptrdiff_t>(i));
  return {std::move(c1), std::move(c2)};
}

std::pair<Genotype, Genotype> crossover_homologous(const Individual& a, const Individual& b, Rng& rng) {
  if (!a.mapping.mapped() || !b.mapping.mapped()) return crossover_two_point(a.genotype, b.genotype, rng);
  constexpr int kAttempts = 10;
  const auto& h1 = a.mapping.history;
  const auto& h2 = b.mapping.history;
  // History index i read codon i mod L; only the first pass has a one-to-one
  // correspondence with codon positions.
  const std::size_t n1 = std::min(h1.size(), a.genotype.size());
  const std::size_t n2 = std::min(h2.size(), b.genotype.size());
  const std::size_t start = common_history_prefix(h1, h2);
  if (start >= n1 || start >= n2) return {a.genotype, b.genotype};

  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    const std::size_t end_a = start + rng.below(n1 - start);
    const std::size_t from = start + rng.below(n2 - start);
    if (auto end_b = nearest_same_kind(h2, start, n2, from, h1[end_a].nonterminal)) {
      return exchange_segments(a.genotype, b.genotype, start, end_a, *end_b);
    }
  }
  return {a.genotype, b.genotype};
}

Genotype invert_segment(const Genotype& g, std::size_t first, std::size_t last, std::size_t insert_at) {
  Genotype segment(g.begin() + static_cast<std::ptrdiff_t>(first), g.begin() + static_cast<std::ptrdiff_t>(last) + 1);
  std::reverse(segment.begin(), segment.end());
  Genotype rest(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(first));
  rest.insert(rest.end(), g.begin() + static_cast<std::ptrdiff_t>(last) + 1, g.end());
  rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(insert_at), segment.begin(), segment.end());
  return rest;
}

Genotype mutate_inversion(const Genotype& g, Rng& rng, double rate) {
  if (!rng.chance(rate) || g.size() < 2) return g;
  const std::size_t first = rng.below(g.size());
  const std::size_t last = first + rng.below(g.size() - first);
  const std::size_t remaining = g.size() - (last - first + 1);
  const std::size_t insert_at = rng.below(remaining + 1);
  return invert_segment(g, first, last, insert_at);
}

std::string_view termination_name(Termination t) {
  return t == Termination::target_fitness ? "target-fitness" : "reached-max";
}

namespace {

GenerationRecord record(const Population& pop, std::size_t generation) {
  const Individual& best = pop[best_index(pop)];
  double sum = 0.0;
  std::size_t feasible = 0;
  for (const Individual& ind : pop) {
    if (!ind.fitness.feasible) continue;
    sum += ind.total();
    ++feasible;
  }
  const double mean = feasible > 0 ? sum / static_cast<double>(feasible)
                                   : std::numeric_limits<double>::quiet_NaN();
  return {generation, best.total(), mean, best.mapping.mapped() ? best.mapping.phenotype : std::string()};
}

}  // namespace

RunResult run(const FitnessEvaluator& evaluator, const Grammar& grammar, const GaConfig& config,
              const GenerationObserver& observer) {
  config.validate();
  Rng rng(config.rng_seed);
  Scorer scorer(grammar, evaluator, config);
  Population pop = init_population(config, scorer, rng);

  RunResult result;
  auto log = [&](std::size_t generation) {
    result.trace.push_back(record(pop, generation));
    if (observer) observer(result.trace.back());
  };
  log(0);

  std::size_t generation = 0;
  for (;;) {
    if (pop[best_index(pop)].total() <= config.target_fitness) {
      result.termination = Termination::target_fitness;
      break;
    }
    if (generation >= config.max_generations) break;

    const std::vector<std::size_t> elites = elite_indices(pop, config.elite_count);
    const std::vector<std::size_t> parents = select(pop, config, rng);

    std::vector<Genotype> children;
    children.reserve(parents.size());
    for (std::size_t i = 0; i < parents.size(); i += 2) {
      const Individual& p1 = pop[parents[i]];
      if (i + 1 == parents.size()) {
        children.push_back(p1.genotype);
        break;
      }
      const Individual& p2 = pop[parents[i + 1]];
      if (rng.chance(config.crossover_rate)) {
        auto [c1, c2] = crossover_homologous(p1, p2, rng);
        children.push_back(std::move(c1));
        children.push_back(std::move(c2));
      } else {
        children.push_back(p1.genotype);
        children.push_back(p2.genotype);
      }
    }
    for (Genotype& child : children) child = mutate_inversion(child, rng, config.mutation_rate);

    Population next;
    next.reserve(pop.size());
    for (std::size_t e : elites) next.push_back(pop[e]);
    for (Individual& ind : scorer.make_all(std::move(children))) next.push_back(std::move(ind));
    pop = std::move(next);

    ++generation;
    log(generation);
  }

  result.generations_run = generation;
  result.best = pop[best_index(pop)];
  return result;
}

RunResult run(const Problem& problem, const Grammar& grammar, const GaConfig& config) {
  FitnessOptions options;
  options.sentinel = config.sentinel_fitness;
  FitnessEvaluator evaluator(problem, options);
  return run(evaluator, grammar, config);
}

}  // namespace gepde
