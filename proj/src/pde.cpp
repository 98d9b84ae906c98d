#include "gepde/pde.hpp"

#include <cmath>
#include <limits>

namespace gepde {

namespace {

constexpr std::array<std::string_view, 6> kFaceNames = {"x_min", "x_max", "y_min",
                                                        "y_max", "z_min", "z_max"};

constexpr std::array<Var, 3> kFirst = {Var::ux, Var::uy, Var::uz};
constexpr std::array<Var, 3> kSecond = {Var::uxx, Var::uyy, Var::uzz};

std::size_t idx(Var v) { return static_cast<std::size_t>(v); }

std::string var_list(const VarSet& vars) {
  std::string out;
  for (std::size_t i = 0; i < kVarCount; ++i) {
    if (!vars.test(i)) continue;
    if (!out.empty()) out += ", ";
    out += var_name(static_cast<Var>(i));
  }
  return out;
}

}  // namespace

std::string_view face_name(Face f) { return kFaceNames[static_cast<std::size_t>(f)]; }

VarSet Problem::spatial_vars() const {
  VarSet s;
  for (int a = 0; a < dimension; ++a) s.set(static_cast<std::size_t>(a));
  return s;
}

void Problem::validate() const {
  if (dimension != 2 && dimension != 3) throw ProblemError("dimension must be 2 or 3");
  for (int a = 0; a < dimension; ++a) {
    const Interval& iv = domain[static_cast<std::size_t>(a)];
    if (!(iv.lower < iv.upper) || !std::isfinite(iv.lower) || !std::isfinite(iv.upper)) {
      throw ProblemError("axis " + std::string(var_name(spatial_var(a))) +
                         ": lower bound must be below upper bound");
    }
  }
  if (grid_points < 2) throw ProblemError("grid must have at least 2 points per axis");

  VarSet allowed = spatial_vars();
  allowed.set(idx(Var::u));
  for (int a = 0; a < dimension; ++a) {
    allowed.set(idx(kFirst[static_cast<std::size_t>(a)]));
    allowed.set(idx(kSecond[static_cast<std::size_t>(a)]));
  }
  if (VarSet extra = variables(residual) & ~allowed; extra.any()) {
    throw ProblemError("residual uses undeclared variables: " + var_list(extra));
  }

  if (boundary.size() != face_count(dimension)) {
    throw ProblemError("expected " + std::to_string(face_count(dimension)) +
                       " boundary expressions, got " + std::to_string(boundary.size()));
  }
  for (std::size_t f = 0; f < boundary.size(); ++f) {
    VarSet free = spatial_vars();
    free.reset(face_axis(static_cast<Face>(f)));
    if (VarSet extra = variables(boundary[f]) & ~free; extra.any()) {
      throw ProblemError("boundary " + std::string(face_name(static_cast<Face>(f))) +
                         " uses variables fixed or undeclared on that face: " + var_list(extra));
    }
  }
  if (exact) {
    if (VarSet extra = variables(*exact) & ~spatial_vars(); extra.any()) {
      throw ProblemError("exact solution uses undeclared variables: " + var_list(extra));
    }
  }
}

std::vector<double> axis_points(Interval iv, std::size_t count) {
  std::vector<double> pts(count);
  if (count == 1) {
    pts[0] = iv.lower;
    return pts;
  }
  const double mid = 0.5 * (iv.lower + iv.upper);
  const double half = 0.5 * (iv.upper - iv.lower);
  const double steps = static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = (2.0 * static_cast<double>(i) - steps) / steps;  // in [-1, 1]
    pts[i] = mid + half * t;
  }
  pts.front() = iv.lower;
  pts.back() = iv.upper;
  return pts;
}

Grid make_grid(const Problem& problem) {
  Grid grid;
  const auto dim = static_cast<std::size_t>(problem.dimension);
  for (std::size_t a = 0; a < dim; ++a) grid.axes[a] = axis_points(problem.domain[a], problem.grid_points);

  const std::size_t t = problem.grid_points;
  if (dim == 2) {
    for (double x : grid.axes[0]) {
      for (double y : grid.axes[1]) {
        grid.interior.coords[0].push_back(x);
        grid.interior.coords[1].push_back(y);
      }
    }
  } else {
    for (double x : grid.axes[0]) {
      for (double y : grid.axes[1]) {
        for (double z : grid.axes[2]) {
          grid.interior.coords[0].push_back(x);
          grid.interior.coords[1].push_back(y);
          grid.interior.coords[2].push_back(z);
        }
      }
    }
  }

  for (std::size_t f = 0; f < face_count(problem.dimension); ++f) {
    const Face face = static_cast<Face>(f);
    const std::size_t fixed = face_axis(face);
    const Interval& iv = problem.domain[fixed];
    const double value = face_is_upper(face) ? iv.upper : iv.lower;
    std::vector<std::size_t> free;
    for (std::size_t a = 0; a < dim; ++a) {
      if (a != fixed) free.push_back(a);
    }
    PointSet ps;
    if (dim == 2) {
      for (std::size_t i = 0; i < t; ++i) {
        ps.coords[fixed].push_back(value);
        ps.coords[free[0]].push_back(grid.axes[free[0]][i]);
      }
    } else {
      for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t j = 0; j < t; ++j) {
          ps.coords[fixed].push_back(value);
          ps.coords[free[0]].push_back(grid.axes[free[0]][i]);
          ps.coords[free[1]].push_back(grid.axes[free[1]][j]);
        }
      }
    }
    grid.faces.push_back(std::move(ps));
  }
  return grid;
}

namespace {

Binding point_binding(const PointSet& ps, std::size_t k, int dimension) {
  Binding b;
  for (int a = 0; a < dimension; ++a) {
    b.set(spatial_var(a), ps.coords[static_cast<std::size_t>(a)][k]);
  }
  return b;
}

bool is_leaf(const Expr& e) {
  return std::holds_alternative<Constant>(e.node().data) ||
         std::holds_alternative<Variable>(e.node().data);
}

// Records the largest subtrees of `e` that depend on coordinates only.
void collect_spatial(const Expr& e, const VarSet& spatial, std::vector<Expr>& out) {
  if ((variables(e) & ~spatial).none()) {
    if (!is_leaf(e)) out.push_back(e);
    return;
  }
  if (const auto* b = std::get_if<Binary>(&e.node().data)) {
    collect_spatial(b->lhs, spatial, out);
    collect_spatial(b->rhs, spatial, out);
  } else if (const auto* u = std::get_if<Unary>(&e.node().data)) {
    collect_spatial(u->arg, spatial, out);
  }
}

thread_local std::vector<double> tls_workspace;

}  // namespace

FitnessEvaluator::FitnessEvaluator(Problem problem, FitnessOptions options)
    : problem_(std::move(problem)), options_(options) {
  problem_.validate();
  grid_ = make_grid(problem_);
  const int dim = problem_.dimension;

  for (std::size_t a = 0; a < 3; ++a) interior_columns_.push_back(grid_.interior.coords[a]);
  std::vector<Expr> spatial_parts;
  collect_spatial(problem_.residual, problem_.spatial_vars(), spatial_parts);
  for (const Expr& part : spatial_parts) {
    if (residual_precomputed_.contains(part.get())) continue;
    std::vector<double> col(grid_.interior.size());
    for (std::size_t k = 0; k < col.size(); ++k) {
      EvalOutcome r = gepde::evaluate(part, point_binding(grid_.interior, k, dim));
      if (!r.finite) {
        throw ProblemError("residual term " + to_string(part) + " is not finite on the grid");
      }
      col[k] = r.value;
    }
    residual_precomputed_.emplace(part.get(), static_cast<Program::Slot>(interior_columns_.size()));
    interior_columns_.push_back(std::move(col));
  }

  boundary_columns_.resize(3);
  for (std::size_t f = 0; f < grid_.faces.size(); ++f) {
    const PointSet& ps = grid_.faces[f];
    face_offsets_.push_back(boundary_targets_.size());
    for (std::size_t k = 0; k < ps.size(); ++k) {
      for (std::size_t a = 0; a < 3; ++a) {
        if (!ps.coords[a].empty()) boundary_columns_[a].push_back(ps.coords[a][k]);
      }
      EvalOutcome g = gepde::evaluate(problem_.boundary[f], point_binding(ps, k, dim));
      if (!g.finite) {
        throw ProblemError("boundary " + std::string(face_name(static_cast<Face>(f))) +
                           " is not finite on the grid");
      }
      boundary_targets_.push_back(g.value);
    }
  }
  face_offsets_.push_back(boundary_targets_.size());
  if (dim == 2) {
    // Unused z columns still occupy their slot index.
    interior_columns_[2].assign(grid_.interior.size(), 0.0);
    boundary_columns_[2].assign(boundary_targets_.size(), 0.0);
  }

  const VarSet& used = variables(problem_.residual);
  for (std::size_t i = 0; i < kVarCount; ++i) uses_u_[i] = used.test(i);
}

void FitnessEvaluator::check_candidate(const Expr& candidate) const {
  if (VarSet extra = variables(candidate) & ~problem_.spatial_vars(); extra.any()) {
    throw std::invalid_argument("candidate uses undeclared variables: " + var_list(extra));
  }
}

std::optional<double> FitnessEvaluator::residual_error(const Expr& candidate) const {
  check_candidate(candidate);
  Program prog;
  Program::VarSlots slots = Program::no_vars();
  for (std::size_t c = 0; c < interior_columns_.size(); ++c) {
    Program::Slot s = prog.column(c);
    if (c < 3) slots[c] = s;
  }
  slots[idx(Var::u)] = prog.emit(candidate, slots);
  for (int a = 0; a < problem_.dimension; ++a) {
    const auto axis = static_cast<std::size_t>(a);
    const bool first = uses_u_[idx(kFirst[axis])];
    const bool second = uses_u_[idx(kSecond[axis])];
    if (!first && !second) continue;
    Expr d1 = differentiate(candidate, spatial_var(axis));
    if (first) slots[idx(kFirst[axis])] = prog.emit(d1, slots);
    if (second) slots[idx(kSecond[axis])] = prog.emit(differentiate(d1, spatial_var(axis)), slots);
  }
  const Program::Slot out = prog.emit(problem_.residual, slots, &residual_precomputed_);

  const std::size_t n = grid_.interior.size();
  std::vector<double>& ws = tls_workspace;
  if (!prog.run(interior_columns_, n, ws)) return std::nullopt;
  double sum = 0.0;
  for (double r : Program::values(ws, out, n)) sum += r * r;
  if (!std::isfinite(sum)) return std::nullopt;
  return sum;
}

std::optional<std::vector<double>> FitnessEvaluator::boundary_penalty(const Expr& candidate) const {
  check_candidate(candidate);
  Program prog;
  Program::VarSlots slots = Program::no_vars();
  for (std::size_t a = 0; a < 3; ++a) slots[a] = prog.column(a);
  const Program::Slot out = prog.emit(candidate, slots);

  const std::size_t n = boundary_targets_.size();
  std::vector<double>& ws = tls_workspace;
  if (!prog.run(boundary_columns_, n, ws)) return std::nullopt;
  auto u = Program::values(ws, out, n);
  std::vector<double> penalties;
  for (std::size_t f = 0; f + 1 < face_offsets_.size(); ++f) {
    double sum = 0.0;
    for (std::size_t k = face_offsets_[f]; k < face_offsets_[f + 1]; ++k) {
      const double d = u[k] - boundary_targets_[k];
      sum += d * d;
    }
    if (!std::isfinite(sum)) return std::nullopt;
    penalties.push_back(sum);
  }
  return penalties;
}

FitnessReport FitnessEvaluator::rejected() const {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  FitnessReport r;
  r.residual = nan;
  r.face_penalties.assign(face_count(problem_.dimension), nan);
  r.total = options_.sentinel;
  r.feasible = false;
  return r;
}

FitnessReport FitnessEvaluator::evaluate(const Expr& candidate) const {
  auto penalties = boundary_penalty(candidate);
  if (!penalties) return rejected();
  auto residual = residual_error(candidate);
  if (!residual) return rejected();
  double penalty_sum = 0.0;
  for (double p : *penalties) penalty_sum += p;
  const double total = *residual + options_.penalty_weight * penalty_sum;
  if (!std::isfinite(total)) return rejected();
  return {*residual, std::move(*penalties), total, true};
}

FitnessReport fitness(const Expr& candidate, const Problem& problem, double penalty_weight) {
  FitnessOptions options;
  options.penalty_weight = penalty_weight;
  return FitnessEvaluator(problem, options).evaluate(candidate);
}

DifferenceGrid compare_to_exact(const Expr& candidate, const Problem& problem,
                                std::size_t points_per_axis) {
  if (!problem.exact) throw std::invalid_argument("problem '" + problem.name + "' has no exact solution");
  Problem sampling = problem;
  sampling.grid_points = points_per_axis;
  Grid grid = make_grid(sampling);

  DifferenceGrid out;
  out.points = std::move(grid.interior);
  out.difference.resize(out.points.size());
  for (std::size_t k = 0; k < out.points.size(); ++k) {
    Binding b = point_binding(out.points, k, problem.dimension);
    EvalOutcome c = evaluate(candidate, b);
    EvalOutcome e = evaluate(*problem.exact, b);
    double d = std::abs(c.value - e.value);
    if (!c.finite || !e.finite || !std::isfinite(d)) d = std::numeric_limits<double>::infinity();
    out.difference[k] = d;
    out.max_abs = std::max(out.max_abs, d);
  }
  return out;
}

}  // namespace gepde
