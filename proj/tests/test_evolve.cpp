#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gepde/evolve.hpp"
#include "gepde/suite.hpp"

using namespace gepde;

namespace {

Problem small_u3() {
  Problem p = get_problem("u3");
  p.grid_points = 5;
  return p;
}

GaConfig small_config(std::uint64_t seed) {
  GaConfig c;
  c.population_size = 60;
  c.max_generations = 30;
  c.rng_seed = seed;
  return c;
}

Population with_totals(const std::vector<double>& totals) {
  Population p(totals.size());
  for (std::size_t i = 0; i < totals.size(); ++i) {
    p[i].fitness.total = totals[i];
    p[i].fitness.feasible = true;
  }
  return p;
}

Genotype random_genotype(Rng& rng, std::size_t n = 50) {
  Genotype g(n);
  for (Codon& c : g) c = static_cast<Codon>(rng.below(256));
  return g;
}

Genotype sorted(Genotype g) {
  std::sort(g.begin(), g.end());
  return g;
}

Genotype concat(const Genotype& a, const Genotype& b) {
  Genotype r = a;
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

std::vector<double> best_column(const RunResult& r) {
  std::vector<double> v;
  for (const GenerationRecord& g : r.trace) v.push_back(g.best_fitness);
  return v;
}

struct Fixture {
  Problem problem = small_u3();
  FitnessEvaluator evaluator{problem};
  GaConfig config = small_config(1);
  Scorer scorer{default_grammar(), evaluator, config};
};

}  // namespace

TEST_CASE("rng helpers") {
  Rng a(3), b(3);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + static_cast<std::size_t>(i % 17);
    const std::size_t v = a.below(n);
    CHECK(v < n);
    CHECK(v == b.below(n));
    const double u = a.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    b.uniform();
  }
  Rng c(3);
  CHECK_FALSE(c.chance(0.0));
  CHECK(c.chance(1.0));
}

TEST_CASE("config validation") {
  CHECK_NOTHROW(GaConfig{}.validate());
  GaConfig c;
  c.population_size = 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.crossover_rate = 1.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.mutation_rate = -0.1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.tournament_size = 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.tournament_size = 501;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.elite_count = 500;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("initial population") {
  Fixture f;
  GaConfig c = f.config;
  c.population_size = 3;
  c.rng_seed = 42;
  Rng rng(c.rng_seed);
  Population p = init_population(c, f.scorer, rng);
  REQUIRE(p.size() == 3);
  for (const Individual& ind : p) {
    CHECK(ind.genotype.size() == 50);
    for (Codon v : ind.genotype) CHECK(v <= 255);
  }
  Rng again(42);
  Population q = init_population(c, f.scorer, again);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(q[i].genotype == p[i].genotype);
    CHECK(q[i].total() == p[i].total());
  }

  c.population_size = 500;
  Rng big(7);
  Population r = init_population(c, f.scorer, big);
  const auto mapped = std::count_if(r.begin(), r.end(), [](const Individual& i) { return i.mapping.mapped(); });
  CHECK(mapped >= 1);
  for (const Individual& ind : r) {
    if (!ind.mapping.mapped()) CHECK(ind.total() == 1e8);
  }
}

TEST_CASE("narrow codon range") {
  Fixture f;
  GaConfig c = f.config;
  c.codon_max = 3;
  Rng rng(1);
  for (const Individual& ind : init_population(c, f.scorer, rng)) {
    for (Codon v : ind.genotype) CHECK(v <= 3);
  }
}

TEST_CASE("scorer results do not depend on the memo or on threads") {
  Fixture f;
  Rng rng(4);
  std::vector<Genotype> gs;
  for (int i = 0; i < 80; ++i) gs.push_back(random_genotype(rng));
  gs.push_back(gs[3]);

  Population first = f.scorer.make_all(gs);
  Population second = f.scorer.make_all(gs);
  GaConfig threaded = f.config;
  threaded.threads = 4;
  Scorer other(default_grammar(), f.evaluator, threaded);
  Population third = other.make_all(gs);
  for (std::size_t i = 0; i < gs.size(); ++i) {
    CHECK(first[i].total() == second[i].total());
    CHECK(first[i].total() == third[i].total());
    CHECK(first[i].mapping.phenotype == third[i].mapping.phenotype);
  }
  CHECK(first.back().total() == first[3].total());
}

TEST_CASE("tournament selection") {
  Population p = with_totals({5, 2, 9});
  Rng rng(1);
  for (int i = 0; i < 20; ++i) CHECK(tournament(p, 3, rng) == 1);

  // Ties go to whichever was drawn first.
  Population flat = with_totals({4, 4, 4, 4, 4});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng r(seed);
    Rng peek(seed);
    CHECK(tournament(flat, 3, r) == peek.below(5));
  }
}

TEST_CASE("tournament winners are the minimum of the sampled set") {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> totals(2 + rng.below(30));
    for (double& t : totals) t = static_cast<double>(rng.below(10));
    Population p = with_totals(totals);
    const std::size_t k = 2 + rng.below(totals.size() - 1);

    // Replay the draws to recover the sampled set.
    Rng replay = rng;
    std::vector<std::size_t> drawn;
    while (drawn.size() < k) {
      const std::size_t i = replay.below(p.size());
      if (std::find(drawn.begin(), drawn.end(), i) == drawn.end()) drawn.push_back(i);
    }
    const std::size_t w = tournament(p, k, rng);
    CHECK(std::find(drawn.begin(), drawn.end(), w) != drawn.end());
    for (std::size_t i : drawn) CHECK(p[w].total() <= p[i].total());
  }
}

TEST_CASE("elites and parent pool") {
  Population p = with_totals({3, 1, 7, 1, 0.5});
  CHECK(best_index(p) == 4);
  CHECK(elite_indices(p, 3) == std::vector<std::size_t>{4, 1, 3});
  CHECK(elite_indices(p, 0).empty());

  GaConfig c;
  c.population_size = 5;
  c.elite_count = 2;
  Rng rng(1);
  CHECK(select(p, c, rng).size() == 3);
}

TEST_CASE("common history prefix") {
  const Grammar& g = default_grammar(true);
  MappingResult a = map_genotype(Genotype{10, 4, 8, 15, 3, 6, 19, 21, 9}, g);
  MappingResult b = map_genotype(Genotype{10, 4, 9, 15, 3, 6, 19, 21, 9}, g);  // 9 mod 4 = 1
  CHECK(common_history_prefix(a.history, b.history) == 2);
  CHECK(common_history_prefix(a.history, a.history) == a.history.size());
  CHECK(common_history_prefix(a.history, {}) == 0);
}

TEST_CASE("homologous crossover cuts at the end of the shared history") {
  Fixture f;
  Genotype ga{10, 4, 8, 15, 3, 6, 19, 21, 9, 7, 12, 30};
  Genotype gb{10, 4, 9, 3, 17, 2, 5, 40, 11, 1, 22, 8};
  Individual a = f.scorer.make(ga);
  Individual b = f.scorer.make(gb);
  REQUIRE(a.mapping.mapped());
  REQUIRE(b.mapping.mapped());
  REQUIRE(common_history_prefix(a.mapping.history, b.mapping.history) == 2);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    auto [c1, c2] = crossover_homologous(a, b, rng);
    CHECK(c1.size() == ga.size());
    CHECK(c2.size() == gb.size());
    CHECK(std::equal(ga.begin(), ga.begin() + 2, c1.begin()));
    CHECK(std::equal(gb.begin(), gb.begin() + 2, c2.begin()));
    CHECK(sorted(concat(c1, c2)) == sorted(concat(ga, gb)));
  }
}

TEST_CASE("segment exchange") {
  const Genotype a{1, 2, 3, 4, 5, 6};
  const Genotype b{11, 12, 13, 14, 15, 16};
  auto [c1, c2] = exchange_segments(a, b, 2, 4, 3);
  // c1 gave up two codons for one; its surplus-free partner hands back 16.
  CHECK(c1 == Genotype{1, 2, 13, 5, 6, 16});
  CHECK(c2 == Genotype{11, 12, 3, 4, 14, 15});

  auto [d1, d2] = exchange_segments(a, b, 1, 3, 3);
  CHECK(d1 == Genotype{1, 12, 13, 4, 5, 6});
  CHECK(d2 == Genotype{11, 2, 3, 14, 15, 16});

  auto [e1, e2] = exchange_segments(a, b, 2, 2, 2);
  CHECK(e1 == a);
  CHECK(e2 == b);
}

TEST_CASE("identical parents give identical offspring") {
  Fixture f;
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    Individual p = f.scorer.make(random_genotype(rng));
    auto [c1, c2] = crossover_homologous(p, p, rng);
    CHECK(c1 == p.genotype);
    CHECK(c2 == p.genotype);
  }
}

TEST_CASE("crossover never invents codons and keeps shapes") {
  Fixture f;
  Rng rng(6);
  int rejected_pairs = 0;
  for (int i = 0; i < 400; ++i) {
    Individual a = f.scorer.make(random_genotype(rng));
    Individual b = f.scorer.make(random_genotype(rng));
    rejected_pairs += !a.mapping.mapped() || !b.mapping.mapped();
    auto [c1, c2] = crossover_homologous(a, b, rng);
    CHECK(c1.size() == 50);
    CHECK(c2.size() == 50);
    CHECK(sorted(concat(c1, c2)) == sorted(concat(a.genotype, b.genotype)));
  }
  CHECK(rejected_pairs > 0);

  for (int i = 0; i < 200; ++i) {
    Genotype a = random_genotype(rng), b = random_genotype(rng);
    auto [c1, c2] = crossover_two_point(a, b, rng);
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(((c1[k] == a[k] && c2[k] == b[k]) || (c1[k] == b[k] && c2[k] == a[k])));
    }
  }
}

TEST_CASE("inversion") {
  CHECK(invert_segment({1, 2, 3, 4, 5}, 1, 3, 0) == Genotype{4, 3, 2, 1, 5});
  CHECK(invert_segment({1, 2, 3, 4, 5}, 1, 3, 2) == Genotype{1, 5, 4, 3, 2});
  CHECK(invert_segment({1, 2, 3, 4, 5}, 0, 4, 0) == Genotype{5, 4, 3, 2, 1});
  CHECK(invert_segment({1, 2, 3, 4, 5}, 2, 2, 0) == Genotype{3, 1, 2, 4, 5});

  Rng rng(8);
  Genotype g = random_genotype(rng);
  for (int i = 0; i < 100; ++i) CHECK(mutate_inversion(g, rng, 0.0) == g);
  int changed = 0;
  for (int i = 0; i < 500; ++i) {
    Genotype m = mutate_inversion(g, rng, 1.0);
    CHECK(m.size() == g.size());
    CHECK(sorted(m) == sorted(g));
    changed += m != g;
  }
  CHECK(changed > 400);
}

TEST_CASE("run with no generations returns the initial best") {
  Fixture f;
  GaConfig c = f.config;
  c.max_generations = 0;
  RunResult r = run(f.evaluator, default_grammar(), c);
  CHECK(r.generations_run == 0);
  REQUIRE(r.trace.size() == 1);

  Scorer fresh(default_grammar(), f.evaluator, c);
  Rng rng(c.rng_seed);
  Population init = init_population(c, fresh, rng);
  const Individual& best = init[best_index(init)];
  CHECK(r.best.genotype == best.genotype);
  CHECK(r.best.total() == best.total());
  CHECK(r.termination == Termination::reached_max);
}

TEST_CASE("runs are deterministic, monotone and consistent") {
  Fixture f;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    GaConfig c = small_config(seed);
    RunResult a = run(f.evaluator, default_grammar(), c);
    RunResult b = run(f.evaluator, default_grammar(), c);
    c.threads = 3;
    RunResult t = run(f.evaluator, default_grammar(), c);
    CHECK(best_column(a) == best_column(b));
    CHECK(best_column(a) == best_column(t));
    CHECK(a.best.genotype == b.best.genotype);
    REQUIRE(a.trace.size() == a.generations_run + 1);
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
      CHECK(a.trace[i].generation == i);
      CHECK(a.trace[i].best_phenotype == b.trace[i].best_phenotype);
      if (i > 0) CHECK(a.trace[i].best_fitness <= a.trace[i - 1].best_fitness);
      if (std::isfinite(a.trace[i].mean_fitness)) CHECK(a.trace[i].mean_fitness >= a.trace[i].best_fitness);
    }
    CHECK(a.best.total() == a.trace.back().best_fitness);
    CHECK(a.best.mapping.phenotype == a.trace.back().best_phenotype);
  }
}

TEST_CASE("without variation the best never changes") {
  Fixture f;
  GaConfig c = small_config(4);
  c.crossover_rate = 0.0;
  c.mutation_rate = 0.0;
  RunResult r = run(f.evaluator, default_grammar(), c);
  for (const GenerationRecord& g : r.trace) {
    CHECK(g.best_fitness == r.trace.front().best_fitness);
    CHECK(g.best_phenotype == r.trace.front().best_phenotype);
  }
}

TEST_CASE("target fitness stops the run") {
  Fixture f;
  GaConfig c = small_config(1);
  c.target_fitness = 1e9;
  RunResult r = run(f.evaluator, default_grammar(), c);
  CHECK(r.termination == Termination::target_fitness);
  CHECK(r.generations_run == 0);
  CHECK(termination_name(r.termination) == "target-fitness");
  CHECK(termination_name(Termination::reached_max) == "reached-max");

  // x*y solves Laplace's equation with matching faces; small runs find it.
  Problem p = f.problem;
  p.residual = parse_expression("uxx+uyy");
  p.boundary = {Expr::constant(0), parse_expression("y"), Expr::constant(0), parse_expression("x")};
  p.exact = parse_expression("x*y");
  FitnessEvaluator ev(p);
  bool solved = false;
  for (std::uint64_t seed = 1; seed <= 5 && !solved; ++seed) {
    GaConfig s = small_config(seed);
    s.population_size = 200;
    s.max_generations = 200;
    RunResult rr = run(ev, default_grammar(), s);
    if (rr.termination == Termination::target_fitness) {
      solved = true;
      CHECK(rr.best.total() <= s.target_fitness);
      CHECK(compare_to_exact(parse_expression(rr.best.mapping.phenotype), p, 20).max_abs < 1e-6);
    }
  }
  CHECK(solved);
}
