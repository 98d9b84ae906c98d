#ifndef GEPDE_EXPR_HPP
#define GEPDE_EXPR_HPP

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace gepde {

// Variables that may appear in an expression. The spatial ones (x, y, z) are
// what candidate solutions are written in; the u-family is only meaningful
// inside a residual functional, where it stands for the candidate and its
// partial derivatives.
enum class Var : std::uint8_t { x, y, z, u, ux, uy, uz, uxx, uyy, uzz };
inline constexpr std::size_t kVarCount = 10;

std::string_view var_name(Var v);
std::optional<Var> var_from_name(std::string_view name);
constexpr bool is_spatial(Var v) { return v == Var::x || v == Var::y || v == Var::z; }

// Index of a spatial variable on its axis (x=0, y=1, z=2).
constexpr std::size_t axis_of(Var v) { return static_cast<std::size_t>(v); }
constexpr Var spatial_var(std::size_t axis) { return static_cast<Var>(axis); }

enum class BinaryOp : std::uint8_t { add, sub, mul, div };

// Unary functions the grammar can emit. The four radial basis functions take
// the evaluated argument as the radius r and a positive shape parameter c:
//   BRF1 = exp(-c r^2), BRF2 = sqrt(c^2 + r^2),
//   BRF3 = 1 / sqrt(c^2 + r^2), BRF4 = 1 / (c^2 + r^2).
enum class Func : std::uint8_t { sin, cos, exp, log, sqrt, brf1, brf2, brf3, brf4 };

std::string_view func_name(Func f);
std::optional<Func> func_from_name(std::string_view name);
constexpr bool is_rbf(Func f) { return f >= Func::brf1; }

char op_symbol(BinaryOp op);

inline constexpr double kDefaultRbfShape = 1.0;

using VarSet = std::bitset<kVarCount>;

struct Node;

// Immutable expression tree handle. Copies share structure.
class Expr {
 public:
  static Expr constant(double value);
  static Expr variable(Var v);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
  static Expr unary(Func f, Expr arg, double shape = kDefaultRbfShape);

  const Node& node() const { return *node_; }
  const Node* get() const { return node_.get(); }

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Constant {
  double value;
};
struct Variable {
  Var var;
};
struct Binary {
  BinaryOp op;
  Expr lhs;
  Expr rhs;
};
struct Unary {
  Func func;
  Expr arg;
  double shape;  // only meaningful for the RBFs
};

struct Node {
  std::variant<Constant, Variable, Binary, Unary> data;
  VarSet vars;  // variables occurring anywhere below this node
  std::size_t size;
};

// Structural equality; constants compare by bit pattern.
bool structurally_equal(const Expr& a, const Expr& b);
inline bool operator==(const Expr& a, const Expr& b) { return structurally_equal(a, b); }

inline const VarSet& variables(const Expr& e) { return e.node().vars; }
inline bool depends_on(const Expr& e, Var v) { return e.node().vars.test(static_cast<std::size_t>(v)); }
inline std::size_t node_count(const Expr& e) { return e.node().size; }
const Constant* as_constant(const Expr& e);

Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);

// Variable assignment for point evaluation.
class Binding {
 public:
  Binding() = default;
  Binding(std::initializer_list<std::pair<Var, double>> values);

  Binding& set(Var v, double value);
  bool bound(Var v) const { return bound_.test(static_cast<std::size_t>(v)); }
  double get(Var v) const { return values_[static_cast<std::size_t>(v)]; }

 private:
  std::array<double, kVarCount> values_{};
  VarSet bound_;
};

struct EvalOutcome {
  double value;
  bool finite;
};

class UnboundVariableError : public std::invalid_argument {
 public:
  explicit UnboundVariableError(Var v);
  Var var() const { return var_; }

 private:
  Var var_;
};

// Plain IEEE arithmetic, no protected operators. `finite` is false when any
// node on the way produced NaN or an infinity.
EvalOutcome evaluate(const Expr& e, const Binding& point);

double apply(Func f, double arg, double shape);
double apply(BinaryOp op, double lhs, double rhs);

// Exact partial derivative by the usual rules. Terms that are identically
// zero because a subtree does not depend on `v` are left out; the result is
// otherwise unsimplified apart from constant folding.
Expr differentiate(const Expr& e, Var v);

// Folds every all-constant subtree whose value is finite.
Expr fold_constants(const Expr& e);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

struct ParseOptions {
  double rbf_shape = kDefaultRbfShape;
};

// Infix syntax: + - * / with the usual precedence (left associative),
// name(expr) for functions, variables, decimal literals, `pi`, unary minus
// and parentheses.
Expr parse_expression(std::string_view text, const ParseOptions& options = {});

// Canonical text form with minimal parentheses. parse_expression of the
// result is structurally equal to the input.
std::string to_string(const Expr& e);

}  // namespace gepde

#endif  // GEPDE_EXPR_HPP
