#pragma once

// Immutable expression trees.
//
// Leaves are numbers, symbols, indexed unknowns (L^{l,m}) and parameter-field
// samples (sigma_t, Q^{l,m}, ...). Unknowns and field samples carry an optional
// position: empty means "the continuous variable x", otherwise a stencil-space
// location in doubled units, so (1,0,0) is half a voxel along +x from the
// hypothetical centre voxel. Staggered locations are therefore exact integers.

#include <array>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pnsolver/sh.hpp"

namespace pnsolver::cas {

using sh::ShIndex;

/// Stencil-space position in doubled units (one unit == half a voxel).
using Position = std::array<int, 3>;

enum class Kind { number, symbol, unknown, field, add, mul, power, derivative, delta };

class Expr;

namespace detail {
struct Node;
}

class Expr {
 public:
  Expr();  // the number 0
  Expr(double value);  // NOLINT: numbers convert implicitly

  Kind kind() const;
  bool is(Kind k) const { return kind() == k; }
  bool is_leaf() const;
  bool is_number(double v) const;

  double value() const;
  const std::string& name() const;
  const std::optional<ShIndex>& index() const;
  const std::optional<Position>& position() const;
  int axis() const;
  int exponent() const;
  std::span<const Expr> children() const;
  const Expr& child(std::size_t i) const { return children()[i]; }

  std::size_t hash() const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const detail::Node> node);
  friend Expr make_node(detail::Node node);

  std::shared_ptr<const detail::Node> node_;
};

/// Structural total order; deterministic across runs.
std::strong_ordering compare(const Expr& a, const Expr& b);

struct ExprHash {
  std::size_t operator()(const Expr& e) const { return e.hash(); }
};

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

Expr number(double value);
Expr symbol(std::string name);
Expr unknown(std::string name, ShIndex index, std::optional<Position> position = std::nullopt);
Expr field(std::string name, std::optional<ShIndex> index = std::nullopt,
           std::optional<Position> position = std::nullopt);

/// Raw constructors: flatten nothing and fold nothing, except that zero or one
/// operand collapses to the identity or to the operand itself.
Expr sum(std::vector<Expr> terms);
Expr product(std::vector<Expr> factors);
Expr power(Expr base, int exponent);
Expr derivative(int axis, Expr operand);
Expr kronecker_delta(Expr i, Expr j);

/// Same leaf with a different position.
Expr at(const Expr& leaf, std::optional<Position> position);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

inline Expr dx(Expr e) { return derivative(0, std::move(e)); }
inline Expr dy(Expr e) { return derivative(1, std::move(e)); }
inline Expr dz(Expr e) { return derivative(2, std::move(e)); }

/// True if any node in the tree satisfies the predicate kind.
bool contains(const Expr& e, Kind kind);

std::size_t node_count(const Expr& e);

namespace detail {

struct Node {
  Kind kind = Kind::number;
  double value = 0.0;
  std::string name;
  std::optional<ShIndex> index;
  std::optional<Position> position;
  int axis = 0;
  int exponent = 1;
  std::vector<Expr> children;
  std::size_t hash = 0;
};

}  // namespace detail

}  // namespace pnsolver::cas
