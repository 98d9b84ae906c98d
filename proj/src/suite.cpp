#include "gepde/suite.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace gepde {

namespace {

constexpr std::array<std::string_view, 5> kNames = {"u1", "u2", "u3", "u4", "u5"};

Expr p(const std::string& text) { return parse_expression(text); }

// Text of the exact solution with each coordinate replaced by `x`, `y`, `z`.
using ExactText = std::function<std::string(const std::string&, const std::string&, const std::string&)>;

std::string coordinate(double value) { return to_string(Expr::constant(value)); }

// Faces listed in `faces` are taken verbatim; otherwise every face carries the
// exact solution restricted to it.
Problem make(std::string name, int dim, Interval box, const std::string& residual,
             const ExactText& exact, std::vector<std::string> faces = {}) {
  Problem pr;
  pr.name = std::move(name);
  pr.dimension = dim;
  for (int a = 0; a < dim; ++a) pr.domain[static_cast<std::size_t>(a)] = box;
  pr.residual = p(residual);
  pr.exact = p(exact("x", "y", "z"));
  for (std::size_t f = 0; f < face_count(dim); ++f) {
    if (!faces.empty()) {
      pr.boundary.push_back(p(faces[f]));
      continue;
    }
    const Face face = static_cast<Face>(f);
    std::array<std::string, 3> c = {"x", "y", "z"};
    c[face_axis(face)] = coordinate(face_is_upper(face) ? box.upper : box.lower);
    pr.boundary.push_back(fold_constants(p(exact(c[0], c[1], c[2]))));
  }
  pr.grid_points = default_grid_points(dim);
  pr.validate();
  return pr;
}

Problem u1() {
  return make("u1", 2, {-1.0, 1.0}, "uxx+uyy+32*pi*pi*sin(4*pi*x)*sin(4*pi*y)",
              [](const std::string& x, const std::string& y, const std::string&) {
                return "sin(4*pi*" + x + ")*sin(4*pi*" + y + ")";
              },
              {"0", "0", "0", "0"});
}

Problem u2() {
  return make("u2", 2, {-1.0, 1.0},
              "uxx+uyy-((x*x-1)*(y*y+4*y+1)+(y*y-1)*(x*x+4*x+1))*exp(x+y)",
              [](const std::string& x, const std::string& y, const std::string&) {
                return "(" + x + "*" + x + "-1)*(" + y + "*" + y + "-1)*exp(" + x + "+" + y + ")";
              },
              {"0", "0", "0", "0"});
}

// With exact solution y(y-1)x^3 the Laplacian is 6xy(y-1) + 2x^3, so the
// forcing 6xy(1-y) - 2x^3 enters with a plus sign.
Problem u3() {
  return make("u3", 2, {0.0, 1.0}, "uxx+uyy+6*x*y*(1-y)-2*x*x*x",
              [](const std::string& x, const std::string& y, const std::string&) {
                return y + "*(" + y + "-1)*" + x + "*" + x + "*" + x;
              },
              {"0", "y*(y-1)", "0", "0"});
}

Problem u4() {
  return make("u4", 3, {0.0, 1.0}, "uxx+uyy+uzz-6",
              [](const std::string& x, const std::string& y, const std::string& z) {
                return "1+" + x + "*" + x + "+" + y + "*" + y + "+" + z + "*" + z;
              });
}

// 4 atanh(w), w = cos(sqrt(2) x) / (sqrt(2) cosh y), written with
// atanh(w) = log((1+w)/(1-w))/2 and cosh y = (exp(y)+exp(-y))/2.
Problem u5() {
  return make("u5", 2, {-1.0, 1.0}, "uxx+uyy+(exp(u)-exp(0-u))/2",
              [](const std::string& x, const std::string& y, const std::string&) {
                const std::string w = "(cos(sqrt(2)*" + x + ")/(sqrt(2)*((exp(" + y + ")+exp(0-" + y +
                                      "))/2)))";
                return "2*log((1+" + w + ")/(1-" + w + "))";
              });
}

}  // namespace

std::span<const std::string_view> builtin_problem_names() { return kNames; }

Problem get_problem(std::string_view name) {
  if (name == "u1") return u1();
  if (name == "u2") return u2();
  if (name == "u3") return u3();
  if (name == "u4") return u4();
  if (name == "u5") return u5();
  throw UnknownProblemError("unknown problem '" + std::string(name) + "' (expected u1..u5)");
}

}  // namespace gepde
