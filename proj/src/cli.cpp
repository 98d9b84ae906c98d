#include "gepde/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gepde/suite.hpp"

namespace gepde::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemSource {
  std::string name;
  std::string file;
  std::size_t grid = 0;  // 0 keeps the problem's own T
  double rbf_shape = kDefaultRbfShape;
};

struct RunSettings {
  ProblemSource source;
  std::string grammar = "default";
  bool strict_grammar = false;
  GaConfig ga;
  double penalty_weight = 1.0;
  std::string out_dir = "gepde_out";
  std::size_t diff_grid = 50;
  std::size_t report_every = 100;
  bool quiet = false;
};

void add_problem_options(CLI::App& app, ProblemSource& src) {
  app.add_option("--problem", src.name, "Built-in problem (u1..u5)");
  app.add_option("--problem-file", src.file, "Problem file (key = value format)");
  app.add_option("--grid", src.grid, "Collocation points per axis (overrides the problem's T)")
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
  app.add_option("--rbf-c", src.rbf_shape, "Shape parameter c of the radial basis functions")
      ->check(CLI::PositiveNumber);
}

void add_run_options(CLI::App& app, RunSettings& s) {
  add_problem_options(app, s.source);
  app.add_option("--grammar", s.grammar, "Grammar: default, strict or a BNF file path");
  app.add_flag("--strict-grammar", s.strict_grammar, "Use the grammar without the pi terminal");
  app.add_option("--pop", s.ga.population_size, "Population size");
  app.add_option("--chrom-len", s.ga.chromosome_length, "Codons per chromosome");
  app.add_option("--gens", s.ga.max_generations, "Maximum number of generations");
  app.add_option("--pc", s.ga.crossover_rate, "Crossover probability per pair");
  app.add_option("--pm", s.ga.mutation_rate, "Inversion mutation probability per individual");
  app.add_option("--tournament", s.ga.tournament_size, "Tournament size");
  app.add_option("--elite", s.ga.elite_count, "Individuals copied unchanged to the next generation");
  app.add_option("--wrap", s.ga.wrap_threshold, "Maximum number of wrapping events while mapping");
  app.add_option("--codon-max", s.ga.codon_max, "Largest codon value");
  app.add_option("--sentinel", s.ga.sentinel_fitness, "Fitness assigned to rejected or non-finite candidates");
  app.add_option("--lambda", s.penalty_weight, "Weight of the boundary penalties");
  app.add_option("--target", s.ga.target_fitness, "Stop once the best fitness is at or below this value");
  app.add_option("--seed", s.ga.rng_seed, "Random seed");
  app.add_option("--threads", s.ga.threads, "Fitness evaluation threads")->check(CLI::PositiveNumber);
  app.add_option("--out", s.out_dir, "Output directory");
  app.add_option("--diff-grid", s.diff_grid, "Points per axis of the difference grid")
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
  app.add_option("--report-every", s.report_every, "Progress line every N generations (0: none)");
  app.add_flag("--quiet", s.quiet, "No progress output");
}

Problem resolve_problem(const ProblemSource& src) {
  if (src.name.empty() == src.file.empty()) {
    throw UsageError("give exactly one of --problem or --problem-file");
  }
  Problem p;
  if (!src.file.empty()) {
    try {
      p = load_problem(src.file, ParseOptions{src.rbf_shape});
    } catch (const ProblemError& e) {
      throw UsageError(src.file + ": " + e.what());
    }
  } else {
    try {
      p = get_problem(src.name);
    } catch (const UnknownProblemError& e) {
      throw UsageError(e.what());
    }
  }
  if (src.grid != 0) p.grid_points = src.grid;
  return p;
}

Grammar resolve_grammar(const std::string& spec, bool strict) {
  if (strict || spec == "strict") return default_grammar(true);
  if (spec == "default") return default_grammar(false);
  std::ifstream in(spec);
  if (!in) throw UsageError("cannot open grammar file " + spec);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_bnf(buf.str());
  } catch (const GrammarError& e) {
    throw UsageError(spec + ": " + e.what());
  }
}

std::string canonical(const std::string& phenotype, double rbf_shape) {
  if (phenotype.empty()) return {};
  try {
    return to_string(parse_expression(phenotype, ParseOptions{rbf_shape}));
  } catch (const ParseError&) {
    return phenotype;
  }
}

void write_report(std::ostream& os, const FitnessReport& r, const Problem& problem) {
  os << "feasible = " << (r.feasible ? "true" : "false") << '\n';
  os << "total = " << format_real(r.total) << '\n';
  os << "residual = " << format_real(r.residual) << '\n';
  for (std::size_t f = 0; f < face_count(problem.dimension); ++f) {
    const double v = f < r.face_penalties.size() ? r.face_penalties[f] : std::nan("");
    os << "penalty_" << face_name(static_cast<Face>(f)) << " = " << format_real(v) << '\n';
  }
}

void write_diff_grid(const fs::path& path, const DifferenceGrid& d, int dimension) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << (dimension == 3 ? "x,y,z,diff\n" : "x,y,diff\n");
  for (std::size_t k = 0; k < d.points.size(); ++k) {
    for (int a = 0; a < dimension; ++a) os << format_real(d.points.coords[static_cast<std::size_t>(a)][k]) << ',';
    os << format_real(d.difference[k]) << '\n';
  }
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

int do_run(const RunSettings& s, std::ostream& out) {
  Problem problem = resolve_problem(s.source);
  Grammar grammar = resolve_grammar(s.grammar, s.strict_grammar);
  GaConfig ga = s.ga;
  ga.rbf_shape = s.source.rbf_shape;
  try {
    ga.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const fs::path dir = s.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
  std::ofstream trace(dir / "trace.csv");
  if (!trace) throw std::runtime_error("cannot write " + (dir / "trace.csv").string());

  FitnessOptions options;
  options.penalty_weight = s.penalty_weight;
  options.sentinel = ga.sentinel_fitness;
  FitnessEvaluator evaluator(problem, options);

  trace << "generation,best_fitness,mean_fitness,best_expression\n";
  auto observer = [&](const GenerationRecord& g) {
    const std::string expr = canonical(g.best_phenotype, ga.rbf_shape);
    trace << g.generation << ',' << format_real(g.best_fitness) << ',' << format_real(g.mean_fitness) << ','
          << expr << '\n';
    if (!s.quiet && s.report_every > 0 && g.generation % s.report_every == 0) {
      out << "gen " << g.generation << "  best " << format_real(g.best_fitness) << "  " << expr << '\n';
    }
  };
  RunResult result = run(evaluator, grammar, ga, observer);
  trace.close();
  if (!trace) throw std::runtime_error("failed writing trace.csv");

  const std::string best = canonical(result.best.mapping.phenotype, ga.rbf_shape);
  std::ostringstream summary;
  summary << "problem = " << (s.source.file.empty() ? s.source.name : s.source.file) << '\n';
  summary << "grammar = " << (s.strict_grammar ? "strict" : s.grammar) << '\n';
  summary << "seed = " << ga.rng_seed << '\n';
  summary << "population = " << ga.population_size << '\n';
  summary << "chromosome_length = " << ga.chromosome_length << '\n';
  summary << "grid = " << problem.grid_points << '\n';
  summary << "lambda = " << format_real(s.penalty_weight) << '\n';
  summary << "generations = " << result.generations_run << '\n';
  summary << "termination = " << termination_name(result.termination) << '\n';
  summary << "best_expression = " << best << '\n';
  write_report(summary, result.best.fitness, problem);
  if (problem.exact && !best.empty()) {
    DifferenceGrid d = compare_to_exact(parse_expression(best, ParseOptions{ga.rbf_shape}), problem, s.diff_grid);
    summary << "max_abs_difference = " << format_real(d.max_abs) << '\n';
    summary << "difference_grid = " << s.diff_grid << '\n';
    write_diff_grid(dir / "diffgrid.csv", d, problem.dimension);
  }
  std::ofstream sf(dir / "summary.txt");
  if (!sf) throw std::runtime_error("cannot write " + (dir / "summary.txt").string());
  sf << summary.str();
  if (!sf) throw std::runtime_error("failed writing summary.txt");

  if (!s.quiet) out << summary.str();
  return kOk;
}

struct VerifySettings {
  ProblemSource source;
  std::string expression;
  double penalty_weight = 1.0;
  double target = 1e-7;
  std::size_t diff_grid = 50;
};

int do_verify(const VerifySettings& s, std::ostream& out) {
  Problem problem = resolve_problem(s.source);
  Expr candidate = Expr::constant(0.0);
  try {
    candidate = parse_expression(s.expression, ParseOptions{s.source.rbf_shape});
  } catch (const ParseError& e) {
    throw UsageError(std::string("cannot parse expression: ") + e.what());
  }
  if ((variables(candidate) & ~problem.spatial_vars()).any()) {
    throw UsageError("expression uses variables the problem does not declare");
  }
  FitnessOptions options;
  options.penalty_weight = s.penalty_weight;
  FitnessReport r = FitnessEvaluator(problem, options).evaluate(candidate);
  out << "expression = " << to_string(candidate) << '\n';
  out << "grid = " << problem.grid_points << '\n';
  write_report(out, r, problem);
  if (problem.exact) {
    DifferenceGrid d = compare_to_exact(candidate, problem, s.diff_grid);
    out << "max_abs_difference = " << format_real(d.max_abs) << '\n';
  }
  return r.feasible && r.total <= s.target ? kOk : kAboveTarget;
}

int do_export(const ProblemSource& src, const std::string& out_dir, std::ostream& out) {
  std::vector<std::string> names;
  if (!src.name.empty()) {
    names.push_back(src.name);
  } else {
    for (std::string_view n : builtin_problem_names()) names.emplace_back(n);
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  for (const std::string& name : names) {
    ProblemSource one = src;
    one.name = name;
    Problem p = resolve_problem(one);
    const fs::path path = fs::path(out_dir) / (name + ".problem");
    try {
      save_problem(p, path);
    } catch (const ProblemError& e) {
      throw std::runtime_error(e.what());
    }
    out << path.string() << '\n';
  }
  return kOk;
}

int do_map(const std::vector<Codon>& codons, const std::string& grammar_spec, bool strict, int wrap,
           std::ostream& out) {
  Grammar grammar = resolve_grammar(grammar_spec, strict);
  MappingResult m = map_genotype(codons, grammar, wrap);
  for (const std::string& line : format_trace(m, grammar)) out << line << '\n';
  if (m.mapped()) {
    out << "phenotype = " << m.phenotype << '\n';
  } else {
    out << "rejected\n";
  }
  out << "codons_consumed = " << m.codons_consumed << '\n';
  out << "wraps_used = " << m.wraps_used << '\n';
  return kOk;
}

}  // namespace

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Solve Poisson-type boundary-value problems by grammatical evolution"};
  app.set_config("--config", "", "Read options from a key = value file");
  app.require_subcommand(0, 1);

  RunSettings run_settings;
  add_run_options(app, run_settings);
  CLI::App* run_cmd = app.add_subcommand("run", "Evolve a solution (the default)");
  add_run_options(*run_cmd, run_settings);

  VerifySettings verify_settings;
  CLI::App* verify_cmd = app.add_subcommand("verify", "Score a given expression against a problem");
  verify_cmd->add_option("expression", verify_settings.expression, "Candidate solution")->required();
  add_problem_options(*verify_cmd, verify_settings.source);
  verify_cmd->add_option("--lambda", verify_settings.penalty_weight, "Weight of the boundary penalties");
  verify_cmd->add_option("--target", verify_settings.target, "Exit 0 when the fitness is at or below this");
  verify_cmd->add_option("--diff-grid", verify_settings.diff_grid, "Points per axis for the exact comparison")
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000}));

  ProblemSource export_source;
  std::string export_dir = "problems";
  CLI::App* export_cmd = app.add_subcommand("export", "Write built-in problems as problem files");
  export_cmd->add_option("--problem", export_source.name, "Built-in problem (default: all)");
  export_cmd->add_option("--grid", export_source.grid, "T written to the file")
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
  export_cmd->add_option("--out", export_dir, "Output directory");

  std::vector<Codon> codons;
  std::string map_grammar = "default";
  bool map_strict = false;
  int map_wrap = kDefaultWrapThreshold;
  CLI::App* map_cmd = app.add_subcommand("map", "Map a codon sequence through the grammar");
  map_cmd->add_option("codons", codons, "Codon values")->required();
  map_cmd->add_option("--grammar", map_grammar, "Grammar: default, strict or a BNF file path");
  map_cmd->add_flag("--strict-grammar", map_strict, "Use the grammar without the pi terminal");
  map_cmd->add_option("--wrap", map_wrap, "Maximum number of wrapping events");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (verify_cmd->parsed()) return do_verify(verify_settings, out);
    if (export_cmd->parsed()) return do_export(export_source, export_dir, out);
    if (map_cmd->parsed()) return do_map(codons, map_grammar, map_strict, map_wrap, out);
    return do_run(run_settings, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace gepde::cli
