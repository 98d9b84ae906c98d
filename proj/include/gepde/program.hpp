#ifndef GEPDE_PROGRAM_HPP
#define GEPDE_PROGRAM_HPP

#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "gepde/expr.hpp"

namespace gepde {

// A set of expressions compiled into one straight-line program over shared,
// hash-consed slots. Each slot is evaluated for a whole batch of points at a
// time, so a candidate, its derivatives and the residual built on top of them
// are computed once per distinct subexpression.
class Program {
 public:
  using Slot = std::uint32_t;
  static constexpr Slot kNoSlot = UINT32_MAX;

  // Slot bound to each variable while emitting; kNoSlot means unbound.
  using VarSlots = std::array<Slot, kVarCount>;
  // Subtrees (by node identity) that are already available as slots.
  using Substitutions = std::unordered_map<const Node*, Slot>;

  static VarSlots no_vars();

  // Slot that reads external input column `index`.
  Slot column(std::size_t index);
  Slot constant(double value);

  // Throws UnboundVariableError for variables without a slot.
  Slot emit(const Expr& e, const VarSlots& vars, const Substitutions* subs = nullptr);

  std::size_t slot_count() const { return code_.size(); }

  // Evaluates every slot for `points` points, writing slot s to
  // workspace[s * points, (s + 1) * points). Returns false as soon as a
  // slot holds a non-finite value.
  bool run(std::span<const std::vector<double>> columns, std::size_t points,
           std::vector<double>& workspace) const;

  static std::span<const double> values(const std::vector<double>& workspace, Slot slot,
                                        std::size_t points) {
    return {workspace.data() + static_cast<std::size_t>(slot) * points, points};
  }

 private:
  enum class OpCode : std::uint8_t { constant, column, add, sub, mul, div, func };

  struct Instr {
    OpCode op;
    Func func;
    Slot a;
    Slot b;
    double value;  // constant value or RBF shape
  };

  struct Key {
    OpCode op;
    Func func;
    Slot a;
    Slot b;
    std::uint64_t bits;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };

  Slot intern(const Instr& instr);
  const Instr& at(Slot s) const { return code_[s]; }

  std::vector<Instr> code_;
  std::unordered_map<Key, Slot, KeyHash> index_;
};

}  // namespace gepde

#endif  // GEPDE_PROGRAM_HPP
