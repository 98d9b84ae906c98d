#include "gepde/expr.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

namespace gepde {

namespace {

constexpr std::array<std::string_view, kVarCount> kVarNames = {
    "x", "y", "z", "u", "ux", "uy", "uz", "uxx", "uyy", "uzz"};

constexpr std::array<std::string_view, 9> kFuncNames = {
    "sin", "cos", "exp", "log", "sqrt", "BRF1", "BRF2", "BRF3", "BRF4"};

VarSet single(Var v) {
  VarSet s;
  s.set(static_cast<std::size_t>(v));
  return s;
}

}  // namespace

std::string_view var_name(Var v) { return kVarNames[static_cast<std::size_t>(v)]; }

std::optional<Var> var_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kVarNames.size(); ++i) {
    if (kVarNames[i] == name) return static_cast<Var>(i);
  }
  return std::nullopt;
}

std::string_view func_name(Func f) { return kFuncNames[static_cast<std::size_t>(f)]; }

std::optional<Func> func_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kFuncNames.size(); ++i) {
    if (kFuncNames[i] == name) return static_cast<Func>(i);
  }
  return std::nullopt;
}

char op_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::add: return '+';
    case BinaryOp::sub: return '-';
    case BinaryOp::mul: return '*';
    case BinaryOp::div: return '/';
  }
  return '?';
}

Expr Expr::constant(double value) {
  return Expr(std::make_shared<const Node>(Node{Constant{value}, VarSet{}, 1}));
}

Expr Expr::variable(Var v) {
  return Expr(std::make_shared<const Node>(Node{Variable{v}, single(v), 1}));
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  VarSet vars = lhs.node().vars | rhs.node().vars;
  std::size_t size = 1 + lhs.node().size + rhs.node().size;
  return Expr(std::make_shared<const Node>(
      Node{Binary{op, std::move(lhs), std::move(rhs)}, vars, size}));
}

Expr Expr::unary(Func f, Expr arg, double shape) {
  if (!is_rbf(f)) shape = kDefaultRbfShape;
  VarSet vars = arg.node().vars;
  std::size_t size = 1 + arg.node().size;
  return Expr(std::make_shared<const Node>(Node{Unary{f, std::move(arg), shape}, vars, size}));
}

Expr operator+(Expr a, Expr b) { return Expr::binary(BinaryOp::add, std::move(a), std::move(b)); }
Expr operator-(Expr a, Expr b) { return Expr::binary(BinaryOp::sub, std::move(a), std::move(b)); }
Expr operator*(Expr a, Expr b) { return Expr::binary(BinaryOp::mul, std::move(a), std::move(b)); }
Expr operator/(Expr a, Expr b) { return Expr::binary(BinaryOp::div, std::move(a), std::move(b)); }

const Constant* as_constant(const Expr& e) { return std::get_if<Constant>(&e.node().data); }

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.get() == b.get()) return true;
  const Node& na = a.node();
  const Node& nb = b.node();
  if (na.data.index() != nb.data.index() || na.size != nb.size) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(nb.data);
        if constexpr (std::is_same_v<T, Constant>) {
          return std::bit_cast<std::uint64_t>(x.value) == std::bit_cast<std::uint64_t>(y.value);
        } else if constexpr (std::is_same_v<T, Variable>) {
          return x.var == y.var;
        } else if constexpr (std::is_same_v<T, Binary>) {
          return x.op == y.op && structurally_equal(x.lhs, y.lhs) &&
                 structurally_equal(x.rhs, y.rhs);
        } else {
          return x.func == y.func &&
                 std::bit_cast<std::uint64_t>(x.shape) == std::bit_cast<std::uint64_t>(y.shape) &&
                 structurally_equal(x.arg, y.arg);
        }
      },
      na.data);
}

Binding::Binding(std::initializer_list<std::pair<Var, double>> values) {
  for (const auto& [v, value] : values) set(v, value);
}

Binding& Binding::set(Var v, double value) {
  values_[static_cast<std::size_t>(v)] = value;
  bound_.set(static_cast<std::size_t>(v));
  return *this;
}

UnboundVariableError::UnboundVariableError(Var v)
    : std::invalid_argument("unbound variable '" + std::string(var_name(v)) + "'"), var_(v) {}

double apply(Func f, double r, double c) {
  switch (f) {
    case Func::sin: return std::sin(r);
    case Func::cos: return std::cos(r);
    case Func::exp: return std::exp(r);
    case Func::log: return std::log(r);
    case Func::sqrt: return std::sqrt(r);
    case Func::brf1: return std::exp(-c * r * r);
    case Func::brf2: return std::sqrt(c * c + r * r);
    case Func::brf3: return 1.0 / std::sqrt(c * c + r * r);
    case Func::brf4: return 1.0 / (c * c + r * r);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double apply(BinaryOp op, double a, double b) {
  switch (op) {
    case BinaryOp::add: return a + b;
    case BinaryOp::sub: return a - b;
    case BinaryOp::mul: return a * b;
    case BinaryOp::div: return a / b;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

double eval_node(const Expr& e, const Binding& point, bool& finite) {
  double value = std::visit(
      [&](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, Variable>) {
          if (!point.bound(n.var)) throw UnboundVariableError(n.var);
          return point.get(n.var);
        } else if constexpr (std::is_same_v<T, Binary>) {
          double a = eval_node(n.lhs, point, finite);
          double b = eval_node(n.rhs, point, finite);
          return apply(n.op, a, b);
        } else {
          return apply(n.func, eval_node(n.arg, point, finite), n.shape);
        }
      },
      e.node().data);
  if (!std::isfinite(value)) finite = false;
  return value;
}

}  // namespace

EvalOutcome evaluate(const Expr& e, const Binding& point) {
  bool finite = true;
  double value = eval_node(e, point, finite);
  return {value, finite};
}

namespace {

bool is_constant(const Expr& e, double value) {
  const Constant* c = as_constant(e);
  return c != nullptr && c->value == value;
}

Expr fold_binary(BinaryOp op, Expr a, Expr b) {
  const Constant* ca = as_constant(a);
  const Constant* cb = as_constant(b);
  if (ca != nullptr && cb != nullptr) {
    double v = apply(op, ca->value, cb->value);
    if (std::isfinite(v)) return Expr::constant(v);
  }
  return Expr::binary(op, std::move(a), std::move(b));
}

Expr fold_unary(Func f, Expr a, double shape) {
  if (const Constant* c = as_constant(a)) {
    double v = apply(f, c->value, shape);
    if (std::isfinite(v)) return Expr::constant(v);
  }
  return Expr::unary(f, std::move(a), shape);
}

// Product builder for derivative terms: folds constants and drops an exact
// factor of one (x*1 == x bit for bit, including NaN and infinities).
Expr product(Expr a, Expr b) {
  if (is_constant(a, 1.0)) return b;
  if (is_constant(b, 1.0)) return a;
  return fold_binary(BinaryOp::mul, std::move(a), std::move(b));
}

Expr negate(Expr a) { return product(Expr::constant(-1.0), std::move(a)); }

// nullopt encodes an identically zero derivative.
using Derivative = std::optional<Expr>;

Derivative derive(const Expr& e, Var v);

Expr outer_derivative(const Unary& n) {
  const Expr& r = n.arg;
  const double c = n.shape;
  auto self = [&] { return Expr::unary(n.func, r, c); };
  switch (n.func) {
    case Func::sin: return Expr::unary(Func::cos, r);
    case Func::cos: return negate(Expr::unary(Func::sin, r));
    case Func::exp: return self();
    case Func::log: return fold_binary(BinaryOp::div, Expr::constant(1.0), r);
    case Func::sqrt:
      return fold_binary(BinaryOp::div, Expr::constant(1.0),
                         product(Expr::constant(2.0), Expr::unary(Func::sqrt, r)));
    case Func::brf1:
      // -2c r exp(-c r^2)
      return product(product(Expr::constant(-2.0 * c), r), self());
    case Func::brf2:
      // r / sqrt(c^2 + r^2)
      return product(r, Expr::unary(Func::brf3, r, c));
    case Func::brf3:
      // -r (c^2 + r^2)^(-3/2)
      return product(product(negate(r), self()), Expr::unary(Func::brf4, r, c));
    case Func::brf4:
      // -2r (c^2 + r^2)^(-2)
      return product(product(product(Expr::constant(-2.0), r), self()), self());
  }
  throw std::logic_error("unknown function");
}

Derivative derive(const Expr& e, Var v) {
  if (!depends_on(e, v)) return std::nullopt;
  return std::visit(
      [&](const auto& n) -> Derivative {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, Variable>) {
          return Expr::constant(1.0);
        } else if constexpr (std::is_same_v<T, Binary>) {
          Derivative da = derive(n.lhs, v);
          Derivative db = derive(n.rhs, v);
          switch (n.op) {
            case BinaryOp::add:
              if (!da) return db;
              if (!db) return da;
              return fold_binary(BinaryOp::add, *da, *db);
            case BinaryOp::sub:
              if (!da) return negate(*db);
              if (!db) return da;
              return fold_binary(BinaryOp::sub, *da, *db);
            case BinaryOp::mul: {
              if (!da) return product(n.lhs, *db);
              if (!db) return product(*da, n.rhs);
              return fold_binary(BinaryOp::add, product(*da, n.rhs), product(n.lhs, *db));
            }
            case BinaryOp::div: {
              if (!db) return fold_binary(BinaryOp::div, *da, n.rhs);
              Expr denom = product(n.rhs, n.rhs);
              Expr a_db = product(n.lhs, *db);
              Expr numer = da ? fold_binary(BinaryOp::sub, product(*da, n.rhs), a_db)
                              : negate(a_db);
              return fold_binary(BinaryOp::div, numer, denom);
            }
          }
          return std::nullopt;
        } else {
          Derivative darg = derive(n.arg, v);
          if (!darg) return std::nullopt;
          return product(outer_derivative(n), *darg);
        }
      },
      e.node().data);
}

}  // namespace

Expr differentiate(const Expr& e, Var v) {
  Derivative d = derive(e, v);
  return d ? *d : Expr::constant(0.0);
}

Expr fold_constants(const Expr& e) {
  return std::visit(
      [&](const auto& n) -> Expr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Binary>) {
          return fold_binary(n.op, fold_constants(n.lhs), fold_constants(n.rhs));
        } else if constexpr (std::is_same_v<T, Unary>) {
          return fold_unary(n.func, fold_constants(n.arg), n.shape);
        } else {
          return e;
        }
      },
      e.node().data);
}

namespace {

int precedence(const Expr& e) {
  if (const auto* b = std::get_if<Binary>(&e.node().data)) {
    return (b->op == BinaryOp::add || b->op == BinaryOp::sub) ? 1 : 2;
  }
  return 3;
}

void format_number(std::string& out, double value) {
  if (value == std::numbers::pi) {
    out += "pi";
    return;
  }
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (std::signbit(value)) {
    out += '(';
    out.append(buf, end);
    out += ')';
  } else {
    out.append(buf, end);
  }
}

void write(std::string& out, const Expr& e) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Constant>) {
          format_number(out, n.value);
        } else if constexpr (std::is_same_v<T, Variable>) {
          out += var_name(n.var);
        } else if constexpr (std::is_same_v<T, Binary>) {
          const int p = precedence(e);
          const bool wrap_lhs = precedence(n.lhs) < p;
          const bool wrap_rhs = precedence(n.rhs) <= p;
          if (wrap_lhs) out += '(';
          write(out, n.lhs);
          if (wrap_lhs) out += ')';
          out += op_symbol(n.op);
          if (wrap_rhs) out += '(';
          write(out, n.rhs);
          if (wrap_rhs) out += ')';
        } else {
          out += func_name(n.func);
          out += '(';
          write(out, n.arg);
          out += ')';
        }
      },
      e.node().data);
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  write(out, e);
  return out;
}

}  // namespace gepde
