#ifndef GEPDE_PDE_HPP
#define GEPDE_PDE_HPP

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gepde/expr.hpp"
#include "gepde/program.hpp"

namespace gepde {

struct Interval {
  double lower;
  double upper;
};

// Faces of the box domain, ordered x_min, x_max, y_min, y_max, z_min, z_max.
enum class Face : std::uint8_t { x_min, x_max, y_min, y_max, z_min, z_max };

std::string_view face_name(Face f);
constexpr std::size_t face_axis(Face f) { return static_cast<std::size_t>(f) / 2; }
constexpr bool face_is_upper(Face f) { return static_cast<std::size_t>(f) % 2 == 1; }
constexpr std::size_t face_count(int dimension) { return 2 * static_cast<std::size_t>(dimension); }

constexpr std::size_t default_grid_points(int dimension) { return dimension == 3 ? 20 : 100; }

class ProblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dirichlet boundary-value problem on a box: residual(x, u, derivatives) = 0
// in the interior, u = boundary[face] on every face.
//
// The residual is written over x, y, z, u and the partials ux, uy, uz, uxx,
// uyy, uzz of the candidate. Boundary expressions use only the coordinates
// that vary along their face.
struct Problem {
  std::string name;
  int dimension = 2;
  std::array<Interval, 3> domain{};
  Expr residual = Expr::constant(0.0);
  std::vector<Expr> boundary;
  std::optional<Expr> exact;
  std::size_t grid_points = default_grid_points(2);

  // Throws ProblemError describing the first violated invariant.
  void validate() const;
  VarSet spatial_vars() const;
};

// Points stored one coordinate vector per axis.
struct PointSet {
  std::array<std::vector<double>, 3> coords;
  std::size_t size() const { return coords[0].size(); }
};

struct Grid {
  std::array<std::vector<double>, 3> axes;
  PointSet interior;            // full Cartesian product, x slowest
  std::vector<PointSet> faces;  // one per face
};

// `count` equidistant points from lower to upper inclusive. Symmetric
// intervals give exactly symmetric points.
std::vector<double> axis_points(Interval interval, std::size_t count);
Grid make_grid(const Problem& problem);

struct FitnessOptions {
  double penalty_weight = 1.0;
  double sentinel = 1e8;
};

struct FitnessReport {
  double residual = 0.0;
  std::vector<double> face_penalties;
  double total = 0.0;
  bool feasible = false;
};

// Scores candidates on one problem: squared residual summed over the
// interior grid plus the weighted squared Dirichlet misfit on each face.
// Candidates that produce a non-finite value anywhere get the sentinel.
class FitnessEvaluator {
 public:
  explicit FitnessEvaluator(Problem problem, FitnessOptions options = {});

  const Problem& problem() const { return problem_; }
  const Grid& grid() const { return grid_; }
  const FitnessOptions& options() const { return options_; }

  // Throws std::invalid_argument when the candidate uses variables the
  // problem does not declare.
  std::optional<double> residual_error(const Expr& candidate) const;
  std::optional<std::vector<double>> boundary_penalty(const Expr& candidate) const;
  FitnessReport evaluate(const Expr& candidate) const;
  FitnessReport rejected() const;

 private:
  void check_candidate(const Expr& candidate) const;

  Problem problem_;
  FitnessOptions options_;
  Grid grid_;
  // x, y, z over the interior, then values of residual subtrees that depend
  // on the coordinates alone.
  std::vector<std::vector<double>> interior_columns_;
  Program::Substitutions residual_precomputed_;  // slot == column index
  std::vector<std::vector<double>> boundary_columns_;  // x, y, z over all faces
  std::vector<double> boundary_targets_;
  std::vector<std::size_t> face_offsets_;
  bool uses_u_[kVarCount] = {};
};

FitnessReport fitness(const Expr& candidate, const Problem& problem, double penalty_weight = 1.0);

struct DifferenceGrid {
  PointSet points;
  std::vector<double> difference;  // |candidate - exact|, +inf where not finite
  double max_abs = 0.0;
};

// Throws std::invalid_argument when the problem has no exact solution.
DifferenceGrid compare_to_exact(const Expr& candidate, const Problem& problem,
                                std::size_t points_per_axis);

// Plain-text `key = value` problem files.
Problem parse_problem(std::string_view text, const ParseOptions& options = {});
std::string format_problem(const Problem& problem);
Problem load_problem(const std::filesystem::path& path, const ParseOptions& options = {});
void save_problem(const Problem& problem, const std::filesystem::path& path);

}  // namespace gepde

#endif  // GEPDE_PDE_HPP
