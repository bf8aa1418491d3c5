#pragma once

// Manipulation passes over expression trees. Every pass is pure and returns a
// tree that evaluates to the same value as its input.

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pnsolver/expr.hpp"

namespace pnsolver::cas {

/// Replace every subtree structurally equal to `target` by `replacement`.
Expr substitute(const Expr& e, const Expr& target, const Expr& replacement);

/// Pattern form: `rule` is tried top-down; where it returns a value the subtree
/// is replaced and not visited further.
using Rule = std::function<std::optional<Expr>(const Expr&)>;
Expr substitute_if(const Expr& e, const Rule& rule);

/// Distribute products over sums (including positive integer powers of sums),
/// flatten, fold numeric subtrees, merge equal bases into powers and collect
/// like terms. Children come out in a canonical order.
Expr expand_fold(const Expr& e);

/// Push every derivative down to the leaves using linearity and the product
/// and power rules, then expand_fold.
Expr expand_derivatives(const Expr& e);

/// Weighted sum of unknowns plus the unknown-free remainder.
struct CanonicalForm {
  struct Entry {
    Expr unknown;
    Expr coefficient;
  };
  std::vector<Entry> entries;  // sorted by unknown, keys unique
  Expr residual;

  Expr to_expr() const;
};

/// Requires an expression that is affine in its unknowns and whose unknowns
/// are not under a derivative. Throws NonlinearityError otherwise.
CanonicalForm factorize_canonical(const Expr& e);

/// Derivative orders applied to a leaf, per axis.
using DerivativeOrders = std::array<int, 3>;

/// Supplies values (and, for analytic evaluation, derivatives) of unknown and
/// field leaves.
using LeafSampler = std::function<double(const Expr& leaf, const DerivativeOrders& orders)>;

struct Bindings {
  std::map<std::string, double> symbols;
  LeafSampler sampler;
};

/// Throws UnboundSymbolError for a symbol (or leaf) with no value. A
/// derivative must wrap a leaf (possibly through further derivatives); apply
/// expand_derivatives first otherwise.
double evaluate(const Expr& e, const Bindings& bindings);

/// Postfix form of an expression with every non-numeric leaf mapped to a slot;
/// evaluation is a tight loop over a value array.
class FlatExpr {
 public:
  enum class Op : unsigned char { constant, slot, add, mul, power, delta };
  struct Instruction {
    Op op;
    int arg;  // slot id, operand count or exponent
    double value;
  };

  using SlotResolver = std::function<int(const Expr& leaf)>;

  FlatExpr() = default;
  FlatExpr(const Expr& e, const SlotResolver& resolver);

  double evaluate(std::span<const double> slots, std::vector<double>& stack) const;
  double evaluate(std::span<const double> slots) const;

  std::span<const Instruction> code() const { return code_; }

 private:
  void emit(const Expr& e, const SlotResolver& resolver);

  std::vector<Instruction> code_;
};

}  // namespace pnsolver::cas
