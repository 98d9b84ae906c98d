#ifndef GEPDE_SUITE_HPP
#define GEPDE_SUITE_HPP

#include <span>
#include <stdexcept>
#include <string_view>

#include "gepde/pde.hpp"

namespace gepde {

class UnknownProblemError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Benchmark problems with known closed-form solutions:
//   u1  Laplace(u) = -32 pi^2 sin(4 pi x) sin(4 pi y) on [-1,1]^2
//   u2  Laplace(u) of (x^2-1)(y^2-1)exp(x+y) on [-1,1]^2
//   u3  Laplace(u) + 6xy(1-y) - 2x^3 = 0 on [0,1]^2
//   u4  Laplace(u) = 6 on [0,1]^3
//   u5  Laplace(u) + sinh(u) = 0 on [-1,1]^2 (Mallier-Maslowe vortex row)
// Boundary data is the exact solution restricted to each face.
std::span<const std::string_view> builtin_problem_names();
Problem get_problem(std::string_view name);

}  // namespace gepde

#endif  // GEPDE_SUITE_HPP
