#ifndef GEPDE_EVOLVE_HPP
#define GEPDE_EVOLVE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gepde/grammar.hpp"
#include "gepde/pde.hpp"

namespace gepde {

// Single random stream for a run. Draws are made through the helpers below
// so sequences do not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, n); n must be positive.
  std::size_t below(std::size_t n);
  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

struct GaConfig {
  std::size_t population_size = 500;
  std::size_t chromosome_length = 50;
  double crossover_rate = 0.7;
  double mutation_rate = 0.1;
  std::size_t max_generations = 1000;
  int wrap_threshold = kDefaultWrapThreshold;
  std::size_t tournament_size = 2;
  std::size_t elite_count = 1;
  Codon codon_max = 255;
  double sentinel_fitness = 1e8;
  double target_fitness = 1e-7;
  double rbf_shape = kDefaultRbfShape;
  std::uint64_t rng_seed = 0;
  unsigned threads = 1;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct Individual {
  Genotype genotype;
  MappingResult mapping;
  FitnessReport fitness;

  double total() const { return fitness.total; }
};

using Population = std::vector<Individual>;

// Maps genotypes through the grammar and scores the phenotypes. Fitness is
// memoized by phenotype text; the memo never changes results.
class Scorer {
 public:
  Scorer(const Grammar& grammar, const FitnessEvaluator& evaluator, const GaConfig& config);

  Individual make(Genotype genotype);
  Population make_all(std::vector<Genotype> genotypes);

  const Grammar& grammar() const { return grammar_; }
  const FitnessEvaluator& evaluator() const { return evaluator_; }

 private:
  FitnessReport score(const std::string& phenotype) const;

  const Grammar& grammar_;
  const FitnessEvaluator& evaluator_;
  int wrap_threshold_;
  ParseOptions parse_options_;
  unsigned threads_;
  std::unordered_map<std::string, FitnessReport> memo_;
};

Population init_population(const GaConfig& config, Scorer& scorer, Rng& rng);

// Index of the best individual; ties go to the lowest index.
std::size_t best_index(const Population& population);

// Indices of the `count` best individuals, best first, ties by index.
std::vector<std::size_t> elite_indices(const Population& population, std::size_t count);

// Draws `size` distinct individuals and returns the one with the lowest
// total; the earliest drawn wins ties.
std::size_t tournament(const Population& population, std::size_t size, Rng& rng);

// Parent pool of population_size - elite_count tournament winners.
std::vector<std::size_t> select(const Population& population, const GaConfig& config, Rng& rng);

// Length of the common prefix of two rule histories, comparing
// (nonterminal, alternative) pairs.
std::size_t common_history_prefix(const std::vector<RuleChoice>& a, const std::vector<RuleChoice>& b);

// Two-point exchange between homologous points: codons [start, end_a) of a
// and [start, end_b) of b trade places. When the segments differ in length,
// the longer child hands its surplus tail to the shorter one so both keep
// the parents' length.
std::pair<Genotype, Genotype> exchange_segments(const Genotype& a, const Genotype& b, std::size_t start,
                                                std::size_t end_a, std::size_t end_b);

// Crossover aligned on rule histories. Falls back to two-point crossover if a
// parent has no history, and copies the parents if no compatible second
// point turns up in ten attempts.
std::pair<Genotype, Genotype> crossover_homologous(const Individual& a, const Individual& b, Rng& rng);
std::pair<Genotype, Genotype> crossover_two_point(const Genotype& a, const Genotype& b, Rng& rng);

// Removes codons [first, last], reverses them and reinserts them so that they
// start at `insert_at` in the result.
Genotype invert_segment(const Genotype& g, std::size_t first, std::size_t last, std::size_t insert_at);
Genotype mutate_inversion(const Genotype& g, Rng& rng, double rate);

struct GenerationRecord {
  std::size_t generation;
  double best_fitness;
  double mean_fitness;  // over feasible individuals; NaN if there are none
  std::string best_phenotype;
};

enum class Termination : std::uint8_t { reached_max, target_fitness };
std::string_view termination_name(Termination t);

struct RunResult {
  Individual best;
  std::vector<GenerationRecord> trace;
  std::size_t generations_run = 0;
  Termination termination = Termination::reached_max;
};

using GenerationObserver = std::function<void(const GenerationRecord&)>;

RunResult run(const FitnessEvaluator& evaluator, const Grammar& grammar, const GaConfig& config,
              const GenerationObserver& observer = {});
RunResult run(const Problem& problem, const Grammar& grammar, const GaConfig& config);

}  // namespace gepde

#endif  // GEPDE_EVOLVE_HPP
