#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>

#include "pnsolver/errors.hpp"
#include "pnsolver/expr.hpp"
#include "pnsolver/manip.hpp"
#include "pnsolver/render.hpp"

using namespace pnsolver;
using namespace pnsolver::cas;

namespace {

Expr x = symbol("x");
Expr y = symbol("y");

// Random tree over symbols a..d, no derivatives.
Expr random_tree(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 5);
  std::uniform_int_distribution<int> sym(0, 3);
  std::uniform_real_distribution<double> num(-3.0, 3.0);
  switch (pick(rng)) {
    case 0:
      return number(std::round(num(rng) * 4) / 4);
    case 1:
      return symbol(std::string(1, static_cast<char>('a' + sym(rng))));
    case 2:
      return random_tree(rng, depth - 1) + random_tree(rng, depth - 1);
    case 3:
      return random_tree(rng, depth - 1) * random_tree(rng, depth - 1);
    case 4:
      return random_tree(rng, depth - 1) - random_tree(rng, depth - 1);
    default:
      return power(random_tree(rng, depth - 1), 2);
  }
}

Bindings random_bindings(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Bindings b;
  for (char c = 'a'; c <= 'd'; ++c) b.symbols[std::string(1, c)] = u(rng);
  return b;
}

// Deterministic pseudo-random leaf values keyed on the leaf's hash.
Bindings hashed_leaves(std::uint64_t salt) {
  Bindings b;
  b.symbols["h"] = 0.1;
  b.sampler = [salt](const Expr& leaf, const DerivativeOrders&) {
    std::mt19937_64 rng(leaf.hash() ^ salt);
    return std::uniform_real_distribution<double>(0.5, 2.0)(rng);
  };
  return b;
}

// Sum of |monomial| values of an expanded tree: the scale that rounding
// errors of the expanded form are proportional to.
double monomial_mass(const Expr& expanded, Bindings b) {
  for (auto& [name, value] : b.symbols) value = std::abs(value);
  const Expr positive = substitute_if(expanded, [](const Expr& e) -> std::optional<Expr> {
    if (e.is(Kind::number)) return number(std::abs(e.value()));
    return std::nullopt;
  });
  return evaluate(positive, b);
}

}  // namespace

TEST(Expr, NumberFoldingInProducts) {
  const Expr e = number(2) * number(3) * x;
  EXPECT_EQ(to_pretty(expand_fold(e)), "6*x");
  EXPECT_TRUE(expand_fold(number(2) * number(3)).is_number(6));
}

TEST(Expr, StructuralEqualityAndHash) {
  const Expr a = x * y + number(1);
  const Expr b = x * y + number(1);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_FALSE(a == x * y + number(2));
}

TEST(Expr, PositionsAreExact) {
  const Expr u1 = unknown("L", {1, 1}, Position{1, 0, 0});
  const Expr u2 = unknown("L", {1, 1}, Position{1, 0, 0});
  const Expr u3 = unknown("L", {1, 1}, Position{-1, 0, 0});
  EXPECT_EQ(u1, u2);
  EXPECT_FALSE(u1 == u3);
}

TEST(Substitute, NumberThenFold) {
  const Expr e = substitute(x + number(1), x, number(2));
  EXPECT_TRUE(expand_fold(e).is_number(3));
}

TEST(Substitute, UnderDerivative) {
  const Expr f = symbol("f"), g = symbol("g"), h = symbol("h");
  const Expr e = substitute(dx(f), f, g + h);
  EXPECT_EQ(e, dx(g + h));
  EXPECT_EQ(to_pretty(e), "dx(g + h)");
}

TEST(Substitute, ShExpansionOfCollisionTerm) {
  // sigma_t * L  with  L -> sum_i L[l,m] Y_i gives the collision-term shape.
  const Expr L = symbol("Lhat");
  const Expr sigma = field("sigma_t");
  const Expr expansion = unknown("L", {0, 0}) * symbol("Y00") + unknown("L", {1, 0}) * symbol("Y10");
  const Expr out = expand_fold(substitute(sigma * L, L, expansion));
  const Expr expected = expand_fold(sigma * unknown("L", {0, 0}) * symbol("Y00") + sigma * unknown("L", {1, 0}) * symbol("Y10"));
  EXPECT_EQ(to_pretty(out), to_pretty(expected));
}

TEST(ExpandFold, Distributes) {
  const Expr a = symbol("a"), b = symbol("b"), c = symbol("c");
  EXPECT_EQ(expand_fold((a + b) * c), expand_fold(a * c + b * c));
  EXPECT_EQ(to_pretty(expand_fold((a + b) * c)), "a*c + b*c");
}

TEST(ExpandFold, CollectsLikeTerms) {
  EXPECT_EQ(expand_fold(x + x + number(2) * x), expand_fold(number(4) * x));
  EXPECT_TRUE(expand_fold(x - x).is_number(0));
}

TEST(ExpandFold, RandomTreesPreserveValue) {
  std::mt19937_64 rng(42);
  for (int tree = 0; tree < 200; ++tree) {
    const Expr e = random_tree(rng, 6);
    const Expr f = expand_fold(e);
    for (int k = 0; k < 20; ++k) {
      const Bindings b = random_bindings(rng);
      const double before = evaluate(e, b);
      const double after = evaluate(f, b);
      // Expanding (a*d - 2.25 - d)^8 cancels terms far larger than the result,
      // so the bound scales with the monomial mass when that dominates.
      const double scale = std::max(1 + std::abs(before), monomial_mass(f, b));
      ASSERT_NEAR(before, after, 1e-12 * scale) << to_pretty(e);
    }
  }
}

TEST(ExpandFold, AddAndMulHaveTwoOrMoreChildren) {
  std::mt19937_64 rng(9);
  std::function<void(const Expr&)> check = [&](const Expr& e) {
    if (e.is(Kind::add) || e.is(Kind::mul)) {
      EXPECT_GE(e.children().size(), 2u);
    }
    if (e.is(Kind::mul)) {
      for (std::size_t i = 1; i < e.children().size(); ++i) EXPECT_FALSE(e.child(i).is(Kind::number));
    }
    for (const auto& c : e.children()) check(c);
  };
  for (int i = 0; i < 100; ++i) check(expand_fold(random_tree(rng, 5)));
}

TEST(ExpandDerivatives, ProductRule) {
  const Expr u = unknown("u", {0, 0});
  const Expr s = field("sigma_t");
  const Expr e = expand_derivatives(dx(s * u));
  EXPECT_EQ(e, expand_fold(dx(s) * u + s * dx(u)));
}

TEST(Factorize, CollectsEqualUnknowns) {
  const Expr u = unknown("u", {0, 0}, Position{0, 0, 0});
  const auto form = factorize_canonical(number(2) * u + number(3) * u);
  ASSERT_EQ(form.entries.size(), 1u);
  EXPECT_EQ(form.entries[0].unknown, u);
  EXPECT_TRUE(form.entries[0].coefficient.is_number(5));
  EXPECT_TRUE(form.residual.is_number(0));
}

TEST(Factorize, CoefficientAndResidual) {
  const Position c{0, 0, 0};
  const Expr u = unknown("u", {0, 0}, c);
  const Expr s = field("sigma_t", std::nullopt, c);
  const Expr q = field("q", std::nullopt, c);
  const auto form = factorize_canonical(s * u - q);
  ASSERT_EQ(form.entries.size(), 1u);
  EXPECT_EQ(form.entries[0].coefficient, s);
  EXPECT_EQ(form.residual, expand_fold(-q));
}

TEST(Factorize, KeysDistinguishPositions) {
  const Expr a = unknown("u", {0, 0}, Position{2, 0, 0});
  const Expr b = unknown("u", {0, 0}, Position{-2, 0, 0});
  const auto form = factorize_canonical(a - b + a);
  ASSERT_EQ(form.entries.size(), 2u);
}

TEST(Factorize, RejectsNonlinear) {
  const Expr u = unknown("u", {0, 0});
  const Expr v = unknown("u", {1, 0});
  EXPECT_THROW(factorize_canonical(u * v), NonlinearityError);
  EXPECT_THROW(factorize_canonical(power(u, 2)), NonlinearityError);
}

TEST(Factorize, PreservesValue) {
  const Position p0{0, 0, 0}, p1{2, 0, 0};
  const Expr u0 = unknown("u", {0, 0}, p0), u1 = unknown("u", {0, 0}, p1);
  const Expr s0 = field("sigma_t", std::nullopt, p0), s1 = field("sigma_t", std::nullopt, p1);
  const Expr e = (u1 - u0) * power(number(0.5) * s0 + number(0.5) * s1, -1) * power(symbol("h"), -2) -
                 s0 * (u0 + number(3) * u1) + field("Q", std::nullopt, p0);
  const auto form = factorize_canonical(e);
  for (std::uint64_t salt = 0; salt < 10; ++salt) {
    const Bindings b = hashed_leaves(salt);
    const double before = evaluate(e, b);
    EXPECT_NEAR(evaluate(form.to_expr(), b), before, 1e-12 * (1 + std::abs(before)));
  }
}

TEST(Factorize, IdempotentThroughRenderRoundTrip) {
  const Position p0{0, 0, 0}, p1{0, 2, 0};
  const Expr e = field("sigma_t", std::nullopt, p0) * unknown("L", {0, 0}, p0) -
                 number(0.5) * unknown("L", {1, -1}, p1) * power(symbol("h"), -1) - field("Q", ShIndex{0, 0}, p0);
  const auto first = factorize_canonical(e);
  const auto second = factorize_canonical(parse_pretty(to_pretty(first.to_expr())));
  ASSERT_EQ(first.entries.size(), second.entries.size());
  for (std::size_t i = 0; i < first.entries.size(); ++i) {
    EXPECT_EQ(first.entries[i].unknown, second.entries[i].unknown);
    EXPECT_EQ(first.entries[i].coefficient, second.entries[i].coefficient);
  }
  EXPECT_EQ(first.residual, second.residual);
}

TEST(Evaluate, UnboundSymbolNamesIt) {
  try {
    evaluate(x + y, Bindings{{{"x", 1.0}}, {}});
    FAIL();
  } catch (const UnboundSymbolError& e) {
    EXPECT_EQ(e.symbol(), "y");
  }
}

TEST(Evaluate, KroneckerDelta) {
  EXPECT_EQ(evaluate(kronecker_delta(number(1), number(1)), {}), 1.0);
  EXPECT_EQ(evaluate(kronecker_delta(number(1), number(2)), {}), 0.0);
}

TEST(Render, Pretty) {
  EXPECT_EQ(to_pretty(number(6) * x), "6*x");
  EXPECT_EQ(to_pretty(dx(unknown("L", {1, -1}))), "dx(L[1,-1])");
}

TEST(Render, ParseRoundTrip) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 100; ++i) {
    const Expr e = expand_fold(random_tree(rng, 5));
    EXPECT_EQ(parse_pretty(to_pretty(e)), e) << to_pretty(e);
  }
  const Expr leafy = dz(unknown("L", {2, -1}, Position{1, -1, 0})) * field("p", ShIndex{2, 0}) +
                     number(-0.25) * power(field("sigma_t", std::nullopt, Position{0, 0, 2}), -1);
  EXPECT_EQ(parse_pretty(to_pretty(leafy)), leafy) << to_pretty(leafy);
}

TEST(Render, NumbersRoundTripExactly) {
  for (double v : {0.1, 1.0 / 3.0, std::sqrt(2.0), 1e-17, 6.02e23}) EXPECT_EQ(std::stod(format_number(v)), v);
}

TEST(Render, ParseErrors) {
  EXPECT_THROW(parse_pretty("dx("), ParseError);
  EXPECT_THROW(parse_pretty("1 + * 2"), ParseError);
}

TEST(Render, SourceFrontend) {
  EXPECT_EQ(render(number(6) * x, Frontend::source).find("x") != std::string::npos, true);
  EXPECT_THROW(to_source(unknown("L", {0, 0})), Error);
}

TEST(FlatExpr, MatchesTreeEvaluation) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const Expr e = random_tree(rng, 5);
    const FlatExpr flat(e, [](const Expr& leaf) { return leaf.name()[0] - 'a'; });
    const Bindings b = random_bindings(rng);
    std::vector<double> slots{b.symbols.at("a"), b.symbols.at("b"), b.symbols.at("c"), b.symbols.at("d")};
    const double tree = evaluate(e, b);
    EXPECT_NEAR(flat.evaluate(slots), tree, 1e-12 * (1 + std::abs(tree)));
  }
}
