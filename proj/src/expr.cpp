#include "pnsolver/expr.hpp"

#include <bit>
#include <functional>
#include <utility>

#include "pnsolver/errors.hpp"

namespace pnsolver::cas {

namespace {

std::size_t mix(std::size_t seed, std::size_t value) {
  return seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::size_t compute_hash(const detail::Node& n) {
  std::size_t h = static_cast<std::size_t>(n.kind) * 0x100000001b3ULL;
  switch (n.kind) {
    case Kind::number:
      // +0 and -0 compare equal, so they must hash equal.
      h = mix(h, n.value == 0.0 ? 0 : std::bit_cast<std::uint64_t>(n.value));
      break;
    case Kind::symbol:
    case Kind::unknown:
    case Kind::field:
      h = mix(h, std::hash<std::string>{}(n.name));
      if (n.index) h = mix(mix(h, static_cast<std::size_t>(n.index->l + 1000)), static_cast<std::size_t>(n.index->m + 1000));
      if (n.position)
        for (int p : *n.position) h = mix(h, static_cast<std::size_t>(p + 100000));
      else
        h = mix(h, 7);
      break;
    case Kind::power:
      h = mix(h, static_cast<std::size_t>(n.exponent + 1000));
      break;
    case Kind::derivative:
      h = mix(h, static_cast<std::size_t>(n.axis));
      break;
    default:
      break;
  }
  for (const auto& c : n.children) h = mix(h, c.hash());
  return h;
}

const detail::Node& zero_node() {
  static const detail::Node node = [] {
    detail::Node n;
    n.hash = compute_hash(n);
    return n;
  }();
  return node;
}

template <class T>
std::strong_ordering compare_optional(const std::optional<T>& a, const std::optional<T>& b) {
  if (a.has_value() != b.has_value()) return a.has_value() ? std::strong_ordering::greater : std::strong_ordering::less;
  if (!a) return std::strong_ordering::equal;
  return *a <=> *b;
}

}  // namespace

Expr make_node(detail::Node node) {
  node.hash = compute_hash(node);
  return Expr(std::make_shared<const detail::Node>(std::move(node)));
}

Expr::Expr() : node_(std::shared_ptr<const detail::Node>(std::shared_ptr<const detail::Node>{}, &zero_node())) {}

Expr::Expr(double value) : Expr(number(value)) {}

Expr::Expr(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}

Kind Expr::kind() const { return node_->kind; }

bool Expr::is_leaf() const {
  const Kind k = kind();
  return k == Kind::number || k == Kind::symbol || k == Kind::unknown || k == Kind::field;
}

bool Expr::is_number(double v) const { return kind() == Kind::number && node_->value == v; }

double Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
const std::optional<ShIndex>& Expr::index() const { return node_->index; }
const std::optional<Position>& Expr::position() const { return node_->position; }
int Expr::axis() const { return node_->axis; }
int Expr::exponent() const { return node_->exponent; }
std::span<const Expr> Expr::children() const { return node_->children; }
std::size_t Expr::hash() const { return node_->hash; }

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash()) return false;
  return compare(a, b) == 0;
}

std::strong_ordering compare(const Expr& a, const Expr& b) {
  if (a.kind() != b.kind()) return a.kind() <=> b.kind();
  switch (a.kind()) {
    case Kind::number: {
      const double x = a.value(), y = b.value();
      if (x < y) return std::strong_ordering::less;
      if (x > y) return std::strong_ordering::greater;
      return std::strong_ordering::equal;
    }
    case Kind::symbol:
    case Kind::unknown:
    case Kind::field: {
      if (auto c = a.name() <=> b.name(); c != 0) return c;
      if (auto c = compare_optional(a.index(), b.index()); c != 0) return c;
      return compare_optional(a.position(), b.position());
    }
    case Kind::power:
      if (auto c = a.exponent() <=> b.exponent(); c != 0) return c;
      break;
    case Kind::derivative:
      if (auto c = a.axis() <=> b.axis(); c != 0) return c;
      break;
    default:
      break;
  }
  const auto ca = a.children();
  const auto cb = b.children();
  const std::size_t n = std::min(ca.size(), cb.size());
  for (std::size_t i = 0; i < n; ++i)
    if (auto c = compare(ca[i], cb[i]); c != 0) return c;
  return ca.size() <=> cb.size();
}

Expr number(double value) {
  detail::Node n;
  n.kind = Kind::number;
  n.value = value;
  return make_node(std::move(n));
}

Expr symbol(std::string name) {
  detail::Node n;
  n.kind = Kind::symbol;
  n.name = std::move(name);
  return make_node(std::move(n));
}

Expr unknown(std::string name, ShIndex index, std::optional<Position> position) {
  detail::Node n;
  n.kind = Kind::unknown;
  n.name = std::move(name);
  n.index = index;
  n.position = position;
  return make_node(std::move(n));
}

Expr field(std::string name, std::optional<ShIndex> index, std::optional<Position> position) {
  detail::Node n;
  n.kind = Kind::field;
  n.name = std::move(name);
  n.index = index;
  n.position = position;
  return make_node(std::move(n));
}

Expr sum(std::vector<Expr> terms) {
  if (terms.empty()) return number(0.0);
  if (terms.size() == 1) return std::move(terms.front());
  detail::Node n;
  n.kind = Kind::add;
  n.children = std::move(terms);
  return make_node(std::move(n));
}

Expr product(std::vector<Expr> factors) {
  if (factors.empty()) return number(1.0);
  if (factors.size() == 1) return std::move(factors.front());
  detail::Node n;
  n.kind = Kind::mul;
  n.children = std::move(factors);
  return make_node(std::move(n));
}

Expr power(Expr base, int exponent) {
  detail::Node n;
  n.kind = Kind::power;
  n.exponent = exponent;
  n.children = {std::move(base)};
  return make_node(std::move(n));
}

Expr derivative(int axis, Expr operand) {
  if (axis < 0 || axis > 2) throw IndexError("derivative axis must be 0, 1 or 2");
  detail::Node n;
  n.kind = Kind::derivative;
  n.axis = axis;
  n.children = {std::move(operand)};
  return make_node(std::move(n));
}

Expr kronecker_delta(Expr i, Expr j) {
  detail::Node n;
  n.kind = Kind::delta;
  n.children = {std::move(i), std::move(j)};
  return make_node(std::move(n));
}

Expr at(const Expr& leaf, std::optional<Position> position) {
  if (leaf.kind() == Kind::unknown) return unknown(leaf.name(), *leaf.index(), position);
  if (leaf.kind() == Kind::field) return field(leaf.name(), leaf.index(), position);
  throw Error("at() requires an unknown or field leaf");
}

Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return sum({a, product({number(-1.0), b})}); }
Expr operator*(const Expr& a, const Expr& b) { return product({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return product({a, power(b, -1)}); }
Expr operator-(const Expr& a) { return product({number(-1.0), a}); }

bool contains(const Expr& e, Kind kind) {
  if (e.kind() == kind) return true;
  for (const auto& c : e.children())
    if (contains(c, kind)) return true;
  return false;
}

std::size_t node_count(const Expr& e) {
  std::size_t n = 1;
  for (const auto& c : e.children()) n += node_count(c);
  return n;
}

}  // namespace pnsolver::cas
