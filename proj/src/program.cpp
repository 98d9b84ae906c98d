#include "gepde/program.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace gepde {

Program::VarSlots Program::no_vars() {
  VarSlots v;
  v.fill(kNoSlot);
  return v;
}

std::size_t Program::KeyHash::operator()(const Key& k) const {
  std::uint64_t h = static_cast<std::uint64_t>(k.op) * 0x9E3779B97F4A7C15ULL;
  h ^= (static_cast<std::uint64_t>(k.func) + 0x7F4A7C15ULL + (h << 6) + (h >> 2));
  h ^= (static_cast<std::uint64_t>(k.a) + 0x9E3779B9ULL + (h << 6) + (h >> 2));
  h ^= (static_cast<std::uint64_t>(k.b) + 0x85EBCA6BULL + (h << 6) + (h >> 2));
  h ^= (k.bits + 0xC2B2AE35ULL + (h << 6) + (h >> 2));
  return static_cast<std::size_t>(h);
}

Program::Slot Program::intern(const Instr& instr) {
  Key key{instr.op, instr.func, instr.a, instr.b, std::bit_cast<std::uint64_t>(instr.value)};
  auto [it, inserted] = index_.try_emplace(key, static_cast<Slot>(code_.size()));
  if (inserted) code_.push_back(instr);
  return it->second;
}

Program::Slot Program::column(std::size_t index) {
  return intern({OpCode::column, Func::sin, static_cast<Slot>(index), kNoSlot, 0.0});
}

Program::Slot Program::constant(double value) {
  return intern({OpCode::constant, Func::sin, kNoSlot, kNoSlot, value});
}

Program::Slot Program::emit(const Expr& e, const VarSlots& vars, const Substitutions* subs) {
  if (subs != nullptr) {
    auto it = subs->find(e.get());
    if (it != subs->end()) return it->second;
  }
  return std::visit(
      [&](const auto& n) -> Slot {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return constant(n.value);
        } else if constexpr (std::is_same_v<T, Variable>) {
          Slot s = vars[static_cast<std::size_t>(n.var)];
          if (s == kNoSlot) throw UnboundVariableError(n.var);
          return s;
        } else if constexpr (std::is_same_v<T, Binary>) {
          Slot a = emit(n.lhs, vars, subs);
          Slot b = emit(n.rhs, vars, subs);
          if (at(a).op == OpCode::constant && at(b).op == OpCode::constant) {
            double v = apply(n.op, at(a).value, at(b).value);
            if (std::isfinite(v)) return constant(v);
          }
          OpCode op = OpCode::add;
          switch (n.op) {
            case BinaryOp::add: op = OpCode::add; break;
            case BinaryOp::sub: op = OpCode::sub; break;
            case BinaryOp::mul: op = OpCode::mul; break;
            case BinaryOp::div: op = OpCode::div; break;
          }
          return intern({op, Func::sin, a, b, 0.0});
        } else {
          Slot a = emit(n.arg, vars, subs);
          if (at(a).op == OpCode::constant) {
            double v = apply(n.func, at(a).value, n.shape);
            if (std::isfinite(v)) return constant(v);
          }
          return intern({OpCode::func, n.func, a, kNoSlot, n.shape});
        }
      },
      e.node().data);
}

namespace {

template <typename F>
void map1(double* out, const double* a, std::size_t n, F f) {
  for (std::size_t k = 0; k < n; ++k) out[k] = f(a[k]);
}

}  // namespace

bool Program::run(std::span<const std::vector<double>> columns, std::size_t n,
                  std::vector<double>& ws) const {
  ws.resize(code_.size() * n);
  for (std::size_t s = 0; s < code_.size(); ++s) {
    const Instr& in = code_[s];
    double* out = ws.data() + s * n;
    const double* a = in.a == kNoSlot ? nullptr : ws.data() + static_cast<std::size_t>(in.a) * n;
    const double* b = in.b == kNoSlot ? nullptr : ws.data() + static_cast<std::size_t>(in.b) * n;
    switch (in.op) {
      case OpCode::constant:
        std::fill(out, out + n, in.value);
        break;
      case OpCode::column:
        std::copy_n(columns[in.a].data(), n, out);
        break;
      case OpCode::add:
        for (std::size_t k = 0; k < n; ++k) out[k] = a[k] + b[k];
        break;
      case OpCode::sub:
        for (std::size_t k = 0; k < n; ++k) out[k] = a[k] - b[k];
        break;
      case OpCode::mul:
        for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * b[k];
        break;
      case OpCode::div:
        for (std::size_t k = 0; k < n; ++k) out[k] = a[k] / b[k];
        break;
      case OpCode::func: {
        const double c = in.value;
        switch (in.func) {
          case Func::sin: map1(out, a, n, [](double r) { return std::sin(r); }); break;
          case Func::cos: map1(out, a, n, [](double r) { return std::cos(r); }); break;
          case Func::exp: map1(out, a, n, [](double r) { return std::exp(r); }); break;
          case Func::log: map1(out, a, n, [](double r) { return std::log(r); }); break;
          case Func::sqrt: map1(out, a, n, [](double r) { return std::sqrt(r); }); break;
          default: map1(out, a, n, [&](double r) { return apply(in.func, r, c); }); break;
        }
        break;
      }
    }
    // x * 0 is NaN exactly when x is NaN or infinite.
    double probe = 0.0;
    for (std::size_t k = 0; k < n; ++k) probe += out[k] * 0.0;
    if (probe != 0.0) return false;
  }
  return true;
}

}  // namespace gepde
