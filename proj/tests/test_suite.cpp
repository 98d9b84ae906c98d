#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gepde/evolve.hpp"
#include "gepde/suite.hpp"

using namespace gepde;

TEST_CASE("built-in names") {
  std::vector<std::string_view> names(builtin_problem_names().begin(), builtin_problem_names().end());
  CHECK(names == std::vector<std::string_view>{"u1", "u2", "u3", "u4", "u5"});
  for (std::string_view n : names) {
    Problem p = get_problem(n);
    CHECK(p.name == n);
    CHECK_NOTHROW(p.validate());
    CHECK(p.exact.has_value());
  }
  CHECK_THROWS_AS(get_problem("u6"), UnknownProblemError);
  CHECK_THROWS_AS(get_problem(""), UnknownProblemError);
}

TEST_CASE("problem shapes") {
  CHECK(get_problem("u1").dimension == 2);
  CHECK(get_problem("u4").dimension == 3);
  CHECK(get_problem("u4").boundary.size() == 6);
  CHECK(get_problem("u4").grid_points == 20);
  CHECK(get_problem("u3").grid_points == 100);
  CHECK(get_problem("u1").domain[0].lower == -1.0);
  CHECK(get_problem("u3").domain[1].upper == 1.0);

  const Expr& face = get_problem("u3").boundary[static_cast<std::size_t>(Face::x_max)];
  CHECK(evaluate(face, Binding{{Var::y, 0.5}}).value == -0.25);
}

TEST_CASE("exact solutions score as float noise") {
  for (std::string_view name : {"u1", "u2", "u3"}) {
    for (std::size_t t : {5u, 10u, 100u}) {
      Problem p = get_problem(name);
      p.grid_points = t;
      FitnessReport r = fitness(*p.exact, p);
      CAPTURE(name);
      CAPTURE(t);
      CHECK(r.feasible);
      CHECK(r.total <= 1e-8);
    }
  }
  for (std::size_t t : {5u, 10u, 20u}) {
    Problem p = get_problem("u4");
    p.grid_points = t;
    FitnessReport r = fitness(*p.exact, p);
    CAPTURE(t);
    CHECK(r.total <= 1e-8);
  }
}

TEST_CASE("u5 boundary data comes from its exact solution") {
  Problem p = get_problem("u5");
  p.grid_points = 10;
  auto penalties = FitnessEvaluator(p).boundary_penalty(*p.exact);
  REQUIRE(penalties);
  for (double v : *penalties) CHECK(v <= 1e-20);
}

TEST_CASE("u5 exact solution satisfies the sinh-Poisson equation pointwise") {
  Problem p = get_problem("u5");
  const Expr& u = *p.exact;
  Expr uxx = differentiate(differentiate(u, Var::x), Var::x);
  Expr uyy = differentiate(differentiate(u, Var::y), Var::y);
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const double x = -1 + 2 * rng.uniform();
    const double y = -1 + 2 * rng.uniform();
    Binding at{{Var::x, x}, {Var::y, y}};
    const double value = evaluate(u, at).value;
    // Independent of the stored residual: lap(u) + sinh(u).
    const double residual = evaluate(uxx, at).value + evaluate(uyy, at).value + std::sinh(value);
    CAPTURE(x);
    CAPTURE(y);
    CHECK(std::abs(residual) <= 1e-8);
    // And against the closed form 4 artanh(cos(sqrt2 x) / (sqrt2 cosh y)).
    CHECK(value == doctest::Approx(4 * std::atanh(std::cos(std::sqrt(2.0) * x) / (std::sqrt(2.0) * std::cosh(y)))));
  }
}

TEST_CASE("stored residuals match the stated equations") {
  // Evaluate each residual functional against a hand-written forcing term.
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    const double x = rng.uniform(), y = rng.uniform(), z = rng.uniform();
    const double a = rng.uniform(), b = rng.uniform(), c = rng.uniform(), u = rng.uniform();
    Binding at{{Var::x, x}, {Var::y, y}, {Var::z, z}, {Var::u, u}, {Var::uxx, a}, {Var::uyy, b}, {Var::uzz, c}};
    const double pi = std::numbers::pi;
    CHECK(evaluate(get_problem("u1").residual, at).value ==
          doctest::Approx(a + b + 32 * pi * pi * std::sin(4 * pi * x) * std::sin(4 * pi * y)));
    CHECK(evaluate(get_problem("u3").residual, at).value ==
          doctest::Approx(a + b + 6 * x * y * (1 - y) - 2 * x * x * x));
    CHECK(evaluate(get_problem("u4").residual, at).value == doctest::Approx(a + b + c - 6));
    CHECK(evaluate(get_problem("u5").residual, at).value == doctest::Approx(a + b + std::sinh(u)));
  }
}
