#pragma once

// Frontends that turn expression trees into text.
//
// Pretty-text grammar (also accepted by parse_pretty):
//
//   sum     := product (('+' | '-') product)*
//   product := unary ('*' unary)*
//   unary   := '-' unary | power
//   power   := atom ('^' ['-'] integer)?
//   atom    := number | '(' sum ')'
//            | 'dx(' sum ')' | 'dy(' sum ')' | 'dz(' sum ')'
//            | 'delta(' sum ',' sum ')'
//            | name ['[' int ',' int ']'] ['@(' int ',' int ',' int ')']
//
// A bare name is a symbol unless it is listed as a field; a name with an index
// or a position is an unknown if listed in `unknown_names`, else a field.
// Positions are stencil-space offsets in doubled units (1 == half a voxel).
// Numbers use the shortest representation that round-trips exactly.

#include <functional>
#include <set>
#include <string>
#include <string_view>

#include "pnsolver/expr.hpp"
#include "pnsolver/manip.hpp"

namespace pnsolver::cas {

enum class Frontend { pretty_text, source };

std::string to_pretty(const Expr& e);

struct ParseOptions {
  std::set<std::string, std::less<>> unknown_names{"L", "u"};
  std::set<std::string, std::less<>> field_names{"sigma_t", "sigma_s", "sigma_a", "p", "Q"};
};

Expr parse_pretty(std::string_view text, const ParseOptions& options = {});

/// Renders a leaf (symbol, unknown, field or derivative chain) as C++ source.
using LeafRenderer = std::function<std::string(const Expr& leaf)>;

/// C++ expression text. Without a leaf renderer, symbols render as their names
/// and any other leaf is an error.
std::string to_source(const Expr& e, const LeafRenderer& leaf = {});

std::string render(const Expr& e, Frontend frontend);

/// Straight-line routine evaluating every coefficient of a canonical row and
/// its residual:
///
///   inline void name(const Sample& sample, double h, double* coefficients, double& residual)
///
/// `leaf` renders the non-numeric leaves of the coefficient expressions.
std::string emit_canonical_routine(const CanonicalForm& form, std::string_view name, const LeafRenderer& leaf);

std::string format_number(double value);

}  // namespace pnsolver::cas
