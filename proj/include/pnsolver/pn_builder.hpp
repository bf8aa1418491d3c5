#pragma once

// Real-valued P_N moment equations and the classical diffusion equation, built
// as expression trees.
//
// Every equation is stored as LHS - RHS:
//
//   transport(L) + sigma_t L^{l,m} - lambda_l sigma_s p^{l,0} L^{l,m} - Q^{l,m}
//
// Unknowns are named "L"; parameter fields are "sigma_t", "sigma_s",
// "p"[l,0] and "Q"[l,m]. In 2D the z derivatives vanish and only unknowns with
// even l+m survive.

#include <string>
#include <vector>

#include "pnsolver/expr.hpp"
#include "pnsolver/sh.hpp"

namespace pnsolver {

using sh::ShIndex;

struct Equation {
  ShIndex index;
  cas::Expr expr;
};

struct EquationSet {
  int order = 0;
  int dim = 3;
  std::vector<Equation> equations;
  std::vector<ShIndex> unknowns;  // position == unknown index

  int unknown_index(ShIndex index) const;
  int size() const { return static_cast<int>(unknowns.size()); }
};

/// Which groups of terms to emit; all by default.
struct PnTerms {
  bool transport = true;
  bool collision = true;
  bool scattering = true;
  bool source = true;
};

EquationSet build_pn(int order, int dim, PnTerms terms = {});

/// div((1/(3 sigma_t)) grad L00) - (sigma_t - lambda_0 sigma_s p00) L00 + Q00.
EquationSet build_cda(int dim = 3);

/// Unknown count for an order and dimension.
int unknown_count(int order, int dim);

/// Position of (l,m) in the unknown ordering; 2D keeps even l+m in l-major order.
int sh_flat_index(ShIndex index, int dim);
ShIndex sh_from_flat(int flat, int dim);

/// True if (l,m) is an unknown of the dim-dimensional system.
bool in_scope(ShIndex index, int dim);

/// One line per equation: "L[l,m]: <pretty expr> = 0".
std::string dump_equations(const EquationSet& set);

}  // namespace pnsolver
