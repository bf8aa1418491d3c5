#include "pnsolver/manip.hpp"

#include <cmath>
#include <unordered_map>
#include <utility>

#include "pnsolver/errors.hpp"

namespace pnsolver::cas {

namespace {

Expr normalize(const Expr& e);
Expr distribute(const std::vector<Expr>& factors);

struct Split {
  double coefficient;
  Expr rest;  // number(1) for a pure constant
};

Split split_coefficient(const Expr& term) {
  if (term.is(Kind::number)) return {term.value(), number(1.0)};
  if (term.is(Kind::mul) && term.child(0).is(Kind::number)) {
    const auto c = term.children();
    return {c[0].value(), product(std::vector<Expr>(c.begin() + 1, c.end()))};
  }
  return {1.0, term};
}

Expr scaled(double coefficient, const Expr& rest) {
  if (rest.is(Kind::number)) return number(coefficient * rest.value());
  if (coefficient == 1.0) return rest;
  std::vector<Expr> factors{number(coefficient)};
  if (rest.is(Kind::mul))
    factors.insert(factors.end(), rest.children().begin(), rest.children().end());
  else
    factors.push_back(rest);
  return product(std::move(factors));
}

// Sum of already-normalised terms: flatten and collect like terms.
Expr collect(const std::vector<Expr>& terms) {
  std::map<Expr, double, ExprLess> like;
  double constant = 0.0;
  auto add_term = [&](const Expr& t, auto& self) -> void {
    if (t.is(Kind::add)) {
      for (const auto& c : t.children()) self(c, self);
      return;
    }
    const auto [coefficient, rest] = split_coefficient(t);
    if (rest.is(Kind::number))
      constant += coefficient * rest.value();
    else
      like[rest] += coefficient;
  };
  for (const auto& t : terms) add_term(t, add_term);

  std::vector<Expr> out;
  for (const auto& [rest, coefficient] : like)
    if (coefficient != 0.0) out.push_back(scaled(coefficient, rest));
  if (constant != 0.0 || out.empty()) out.push_back(number(constant));
  return sum(std::move(out));
}

bool needs_distribution(const Expr& base, int exponent) { return base.is(Kind::add) && exponent > 0; }

// Product of normalised factors none of which is a sum.
Expr make_monomial(const std::vector<Expr>& factors) {
  double coefficient = 1.0;
  std::map<Expr, int, ExprLess> powers;
  auto add_factor = [&](const Expr& f, auto& self) -> void {
    switch (f.kind()) {
      case Kind::mul:
        for (const auto& c : f.children()) self(c, self);
        break;
      case Kind::number:
        coefficient *= f.value();
        break;
      case Kind::power:
        powers[f.child(0)] += f.exponent();
        break;
      default:
        powers[f] += 1;
        break;
    }
  };
  for (const auto& f : factors) add_factor(f, add_factor);
  if (coefficient == 0.0) return number(0.0);

  std::vector<Expr> out;
  bool expand = false;
  for (const auto& [base, exponent] : powers) {
    if (exponent == 0) continue;
    if (needs_distribution(base, exponent)) {
      expand = true;
      for (int i = 0; i < exponent; ++i) out.push_back(base);
    } else {
      out.push_back(exponent == 1 ? base : power(base, exponent));
    }
  }
  if (expand) {
    out.push_back(number(coefficient));
    return distribute(out);
  }
  if (out.empty()) return number(coefficient);
  if (coefficient != 1.0) out.insert(out.begin(), number(coefficient));
  return product(std::move(out));
}

Expr distribute(const std::vector<Expr>& factors) {
  std::vector<std::vector<Expr>> partial{{}};
  for (const auto& f : factors) {
    if (f.is(Kind::add)) {
      std::vector<std::vector<Expr>> next;
      next.reserve(partial.size() * f.children().size());
      for (const auto& p : partial)
        for (const auto& t : f.children()) {
          auto q = p;
          q.push_back(t);
          next.push_back(std::move(q));
        }
      partial = std::move(next);
    } else {
      for (auto& p : partial) p.push_back(f);
    }
  }
  std::vector<Expr> terms;
  terms.reserve(partial.size());
  for (const auto& p : partial) terms.push_back(make_monomial(p));
  return collect(terms);
}

Expr normalize_power(const Expr& base, int exponent) {
  if (exponent == 0) return number(1.0);
  if (base.is(Kind::number)) return number(std::pow(base.value(), exponent));
  if (exponent == 1) return base;
  switch (base.kind()) {
    case Kind::power:
      return make_monomial({power(base.child(0), base.exponent() * exponent)});
    case Kind::mul: {
      std::vector<Expr> factors;
      for (const auto& f : base.children()) {
        if (f.is(Kind::number))
          factors.push_back(number(std::pow(f.value(), exponent)));
        else if (f.is(Kind::power))
          factors.push_back(power(f.child(0), f.exponent() * exponent));
        else
          factors.push_back(power(f, exponent));
      }
      return make_monomial(factors);
    }
    case Kind::add:
      if (exponent > 0) return distribute(std::vector<Expr>(static_cast<size_t>(exponent), base));
      return power(base, exponent);
    default:
      return power(base, exponent);
  }
}

Expr normalize_derivative(int axis, const Expr& operand) {
  switch (operand.kind()) {
    case Kind::number:
      return number(0.0);
    case Kind::add: {
      std::vector<Expr> terms;
      for (const auto& t : operand.children()) terms.push_back(normalize_derivative(axis, t));
      return collect(terms);
    }
    case Kind::mul:
      if (operand.child(0).is(Kind::number)) {
        const auto [coefficient, rest] = split_coefficient(operand);
        return make_monomial({number(coefficient), derivative(axis, rest)});
      }
      return derivative(axis, operand);
    default:
      return derivative(axis, operand);
  }
}

Expr normalize(const Expr& e) {
  switch (e.kind()) {
    case Kind::number:
    case Kind::symbol:
    case Kind::unknown:
    case Kind::field:
      return e;
    case Kind::add: {
      std::vector<Expr> terms;
      for (const auto& c : e.children()) terms.push_back(normalize(c));
      return collect(terms);
    }
    case Kind::mul: {
      std::vector<Expr> factors;
      for (const auto& c : e.children()) factors.push_back(normalize(c));
      return distribute(factors);
    }
    case Kind::power:
      return normalize_power(normalize(e.child(0)), e.exponent());
    case Kind::derivative:
      return normalize_derivative(e.axis(), normalize(e.child(0)));
    case Kind::delta: {
      const Expr i = normalize(e.child(0));
      const Expr j = normalize(e.child(1));
      if (i.is(Kind::number) && j.is(Kind::number)) return number(i.value() == j.value() ? 1.0 : 0.0);
      if (i == j) return number(1.0);
      return kronecker_delta(i, j);
    }
  }
  return e;
}

bool is_leaf_chain(const Expr& e) {
  if (e.is(Kind::unknown) || e.is(Kind::field)) return true;
  return e.is(Kind::derivative) && is_leaf_chain(e.child(0));
}

// Derivative of an expression whose own derivatives already sit on leaves.
// Symbols are treated as constants.
Expr differentiate(int axis, const Expr& e) {
  switch (e.kind()) {
    case Kind::number:
    case Kind::symbol:
    case Kind::delta:
      return number(0.0);
    case Kind::unknown:
    case Kind::field:
      return derivative(axis, e);
    case Kind::derivative:
      if (is_leaf_chain(e)) return derivative(axis, e);
      return differentiate(axis, expand_derivatives(e));
    case Kind::add: {
      std::vector<Expr> terms;
      for (const auto& t : e.children()) terms.push_back(differentiate(axis, t));
      return sum(std::move(terms));
    }
    case Kind::mul: {
      const auto f = e.children();
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < f.size(); ++i) {
        std::vector<Expr> factors(f.begin(), f.end());
        factors[i] = differentiate(axis, f[i]);
        terms.push_back(product(std::move(factors)));
      }
      return sum(std::move(terms));
    }
    case Kind::power: {
      const int n = e.exponent();
      return product({number(n), power(e.child(0), n - 1), differentiate(axis, e.child(0))});
    }
  }
  return number(0.0);
}

Expr expand_derivatives_raw(const Expr& e) {
  if (e.is_leaf()) return e;
  if (e.is(Kind::derivative)) {
    const Expr inner = expand_fold(expand_derivatives_raw(e.child(0)));
    return differentiate(e.axis(), inner);
  }
  std::vector<Expr> children;
  for (const auto& c : e.children()) children.push_back(expand_derivatives_raw(c));
  switch (e.kind()) {
    case Kind::add:
      return sum(std::move(children));
    case Kind::mul:
      return product(std::move(children));
    case Kind::power:
      return power(children[0], e.exponent());
    case Kind::delta:
      return kronecker_delta(children[0], children[1]);
    default:
      return e;
  }
}

Expr rebuild(const Expr& e, std::vector<Expr> children) {
  switch (e.kind()) {
    case Kind::add:
      return sum(std::move(children));
    case Kind::mul:
      return product(std::move(children));
    case Kind::power:
      return power(std::move(children[0]), e.exponent());
    case Kind::derivative:
      return derivative(e.axis(), std::move(children[0]));
    case Kind::delta:
      return kronecker_delta(std::move(children[0]), std::move(children[1]));
    default:
      return e;
  }
}

double evaluate_chain(const Expr& e, const Bindings& b) {
  DerivativeOrders orders{0, 0, 0};
  const Expr* node = &e;
  while (node->is(Kind::derivative)) {
    orders[static_cast<size_t>(node->axis())] += 1;
    node = &node->child(0);
  }
  if (!node->is(Kind::unknown) && !node->is(Kind::field))
    throw Error("evaluate: derivative of a composite expression; apply expand_derivatives first");
  if (!b.sampler) {
    std::string label = node->name();
    if (node->index()) label += "[" + std::to_string(node->index()->l) + "," + std::to_string(node->index()->m) + "]";
    throw UnboundSymbolError(label);
  }
  return b.sampler(*node, orders);
}

}  // namespace

Expr substitute(const Expr& e, const Expr& target, const Expr& replacement) {
  return substitute_if(e, [&](const Expr& node) -> std::optional<Expr> {
    if (node == target) return replacement;
    return std::nullopt;
  });
}

Expr substitute_if(const Expr& e, const Rule& rule) {
  if (auto r = rule(e)) return *r;
  if (e.children().empty()) return e;
  std::vector<Expr> children;
  bool changed = false;
  for (const auto& c : e.children()) {
    children.push_back(substitute_if(c, rule));
    changed = changed || !(children.back() == c);
  }
  return changed ? rebuild(e, std::move(children)) : e;
}

Expr expand_fold(const Expr& e) { return normalize(e); }

Expr expand_derivatives(const Expr& e) { return expand_fold(expand_derivatives_raw(e)); }

Expr CanonicalForm::to_expr() const {
  std::vector<Expr> terms;
  for (const auto& entry : entries) terms.push_back(entry.coefficient * entry.unknown);
  terms.push_back(residual);
  return sum(std::move(terms));
}

CanonicalForm factorize_canonical(const Expr& e) {
  const Expr expanded = expand_fold(e);
  std::vector<Expr> terms;
  if (expanded.is(Kind::add))
    terms.assign(expanded.children().begin(), expanded.children().end());
  else
    terms.push_back(expanded);

  std::map<Expr, std::vector<Expr>, ExprLess> grouped;
  std::vector<Expr> residual;
  for (const auto& term : terms) {
    std::vector<Expr> factors;
    if (term.is(Kind::mul))
      factors.assign(term.children().begin(), term.children().end());
    else
      factors.push_back(term);

    std::optional<Expr> key;
    std::vector<Expr> rest;
    for (const auto& f : factors) {
      if (f.is(Kind::unknown)) {
        if (key) throw NonlinearityError("product of two unknowns in a term");
        key = f;
        continue;
      }
      if (contains(f, Kind::unknown)) {
        if (f.is(Kind::derivative)) throw Error("factorize_canonical: unknown under a derivative; discretize first");
        throw NonlinearityError("unknown appears nonlinearly");
      }
      rest.push_back(f);
    }
    if (key)
      grouped[*key].push_back(product(std::move(rest)));
    else
      residual.push_back(term);
  }

  CanonicalForm form;
  for (auto& [key, parts] : grouped) {
    Expr coefficient = expand_fold(sum(std::move(parts)));
    if (coefficient.is_number(0.0)) continue;
    form.entries.push_back({key, std::move(coefficient)});
  }
  form.residual = expand_fold(sum(std::move(residual)));
  return form;
}

double evaluate(const Expr& e, const Bindings& b) {
  switch (e.kind()) {
    case Kind::number:
      return e.value();
    case Kind::symbol: {
      const auto it = b.symbols.find(e.name());
      if (it == b.symbols.end()) throw UnboundSymbolError(e.name());
      return it->second;
    }
    case Kind::unknown:
    case Kind::field:
    case Kind::derivative:
      return evaluate_chain(e, b);
    case Kind::add: {
      double s = 0.0;
      for (const auto& c : e.children()) s += evaluate(c, b);
      return s;
    }
    case Kind::mul: {
      double p = 1.0;
      for (const auto& c : e.children()) p *= evaluate(c, b);
      return p;
    }
    case Kind::power:
      return std::pow(evaluate(e.child(0), b), e.exponent());
    case Kind::delta:
      return evaluate(e.child(0), b) == evaluate(e.child(1), b) ? 1.0 : 0.0;
  }
  return 0.0;
}

FlatExpr::FlatExpr(const Expr& e, const SlotResolver& resolver) { emit(e, resolver); }

void FlatExpr::emit(const Expr& e, const SlotResolver& resolver) {
  switch (e.kind()) {
    case Kind::number:
      code_.push_back({Op::constant, 0, e.value()});
      return;
    case Kind::symbol:
    case Kind::unknown:
    case Kind::field:
    case Kind::derivative:
      code_.push_back({Op::slot, resolver(e), 0.0});
      return;
    case Kind::add:
    case Kind::mul:
      for (const auto& c : e.children()) emit(c, resolver);
      code_.push_back({e.is(Kind::add) ? Op::add : Op::mul, static_cast<int>(e.children().size()), 0.0});
      return;
    case Kind::power:
      emit(e.child(0), resolver);
      code_.push_back({Op::power, e.exponent(), 0.0});
      return;
    case Kind::delta:
      emit(e.child(0), resolver);
      emit(e.child(1), resolver);
      code_.push_back({Op::delta, 2, 0.0});
      return;
  }
}

double FlatExpr::evaluate(std::span<const double> slots, std::vector<double>& stack) const {
  stack.clear();
  for (const auto& ins : code_) {
    switch (ins.op) {
      case Op::constant:
        stack.push_back(ins.value);
        break;
      case Op::slot:
        stack.push_back(slots[static_cast<size_t>(ins.arg)]);
        break;
      case Op::add: {
        const auto first = stack.end() - ins.arg;
        double s = 0.0;
        for (auto it = first; it != stack.end(); ++it) s += *it;
        stack.erase(first, stack.end());
        stack.push_back(s);
        break;
      }
      case Op::mul: {
        const auto first = stack.end() - ins.arg;
        double p = 1.0;
        for (auto it = first; it != stack.end(); ++it) p *= *it;
        stack.erase(first, stack.end());
        stack.push_back(p);
        break;
      }
      case Op::power:
        stack.back() = std::pow(stack.back(), ins.arg);
        break;
      case Op::delta: {
        const double j = stack.back();
        stack.pop_back();
        stack.back() = stack.back() == j ? 1.0 : 0.0;
        break;
      }
    }
  }
  return stack.empty() ? 0.0 : stack.back();
}

double FlatExpr::evaluate(std::span<const double> slots) const {
  std::vector<double> stack;
  return evaluate(slots, stack);
}

}  // namespace pnsolver::cas
