#include "pnsolver/pn_builder.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "pnsolver/errors.hpp"
#include "pnsolver/render.hpp"

namespace pnsolver {

using cas::Expr;
using sh::Coupling;

namespace {

// The x and y rows of the direction recursion pick up this sign in a
// right-handed z-up frame.
constexpr double kHandedness = -1.0;

class TransportBuilder {
 public:
  TransportBuilder(int order, int dim) : order_(order), dim_(dim) {}

  std::vector<Expr> build(int l, int m) {
    terms_.clear();
    const double s = kHandedness;
    const double half = 0.5;
    if (m == 0) {
      const double r = 1.0 / std::numbers::sqrt2;
      add(0, l - 1, 1, s * r, Coupling::c, l - 1, -1);
      add(0, l + 1, 1, -s * r, Coupling::d, l + 1, -1);
      add(1, l - 1, -1, s * r, Coupling::c, l - 1, -1);
      add(1, l + 1, -1, -s * r, Coupling::d, l + 1, -1);
      add(2, l - 1, 0, 1.0, Coupling::a, l - 1, 0);
      add(2, l + 1, 0, 1.0, Coupling::b, l + 1, 0);
    } else if (m < 0) {
      const double beta = (m == -1) ? std::numbers::sqrt2 : 1.0;
      const double gate = (m == -1) ? 0.0 : 1.0;
      add(1, l - 1, -m + 1, -s * half, Coupling::c, l - 1, m - 1);
      add(1, l + 1, -m + 1, s * half, Coupling::d, l + 1, m - 1);
      add(1, l - 1, -m - 1, -s * half * beta, Coupling::e, l - 1, m + 1);
      add(1, l + 1, -m - 1, s * half * beta, Coupling::f, l + 1, m + 1);
      add(0, l - 1, m - 1, s * half, Coupling::c, l - 1, m - 1);
      add(0, l + 1, m - 1, -s * half, Coupling::d, l + 1, m - 1);
      add(0, l - 1, m + 1, -s * half * gate, Coupling::e, l - 1, m + 1);
      add(0, l + 1, m + 1, s * half * gate, Coupling::f, l + 1, m + 1);
      add(2, l - 1, m, 1.0, Coupling::a, l - 1, m);
      add(2, l + 1, m, 1.0, Coupling::b, l + 1, m);
    } else {
      const double beta = (m == 1) ? std::numbers::sqrt2 : 1.0;
      const double gate = (m == 1) ? 0.0 : 1.0;
      add(0, l - 1, m + 1, s * half, Coupling::c, l - 1, -m - 1);
      add(0, l + 1, m + 1, -s * half, Coupling::d, l + 1, -m - 1);
      add(0, l - 1, m - 1, -s * half * beta, Coupling::e, l - 1, -m + 1);
      add(0, l + 1, m - 1, s * half * beta, Coupling::f, l + 1, -m + 1);
      add(1, l - 1, -m - 1, s * half, Coupling::c, l - 1, -m - 1);
      add(1, l + 1, -m - 1, -s * half, Coupling::d, l + 1, -m - 1);
      add(1, l - 1, -m + 1, s * half * gate, Coupling::e, l - 1, -m + 1);
      add(1, l + 1, -m + 1, -s * half * gate, Coupling::f, l + 1, -m + 1);
      add(2, l - 1, m, 1.0, Coupling::a, l - 1, -m);
      add(2, l + 1, m, 1.0, Coupling::b, l + 1, -m);
    }
    return terms_;
  }

 private:
  // weight * coupling(kind, cl, cm) * d_axis L^{tl,tm}, skipped when the
  // target lies outside the truncated basis or the term is gated off.
  void add(int axis, int tl, int tm, double weight, Coupling kind, int cl, int cm) {
    if (weight == 0.0) return;
    if (tl < 0 || tl > order_ || std::abs(tm) > tl) return;
    if (axis >= dim_) return;
    if (!in_scope({tl, tm}, dim_)) return;
    const double w = weight * sh::coupling(kind, cl, cm);
    if (w == 0.0) return;
    terms_.push_back(cas::number(w) * cas::derivative(axis, cas::unknown("L", {tl, tm})));
  }

  int order_;
  int dim_;
  std::vector<Expr> terms_;
};

void require_dim(int dim) {
  if (dim != 2 && dim != 3) throw ConfigError("dimension must be 2 or 3, got " + std::to_string(dim));
}

}  // namespace

bool in_scope(ShIndex index, int dim) {
  if (!index.valid()) return false;
  return dim == 3 || (index.l + index.m) % 2 == 0;
}

int unknown_count(int order, int dim) {
  require_dim(dim);
  return dim == 3 ? (order + 1) * (order + 1) : (order + 1) * (order + 2) / 2;
}

int sh_flat_index(ShIndex index, int dim) {
  require_dim(dim);
  if (!in_scope(index, dim))
    throw IndexError("index " + sh::to_string(index) + " is not an unknown in " + std::to_string(dim) + "D");
  if (dim == 3) return sh::flat_index(index);
  return index.l * (index.l + 1) / 2 + (index.m + index.l) / 2;
}

ShIndex sh_from_flat(int flat, int dim) {
  require_dim(dim);
  if (flat < 0) throw IndexError("negative unknown index");
  if (dim == 3) return sh::from_flat_index(flat);
  int l = 0;
  while ((l + 1) * (l + 2) / 2 <= flat) ++l;
  const int k = flat - l * (l + 1) / 2;
  return {l, 2 * k - l};
}

int EquationSet::unknown_index(ShIndex index) const {
  if (index.l > order) throw IndexError("index " + sh::to_string(index) + " exceeds order " + std::to_string(order));
  const int i = sh_flat_index(index, dim);
  if (i >= size()) throw IndexError("index " + sh::to_string(index) + " not in equation set");
  return i;
}

EquationSet build_pn(int order, int dim, PnTerms terms) {
  if (order < 1) throw ConfigError("P_N order must be >= 1, got " + std::to_string(order));
  require_dim(dim);
  EquationSet set;
  set.order = order;
  set.dim = dim;
  const int count = unknown_count(order, dim);
  TransportBuilder transport(order, dim);
  for (int i = 0; i < count; ++i) {
    const ShIndex index = sh_from_flat(i, dim);
    set.unknowns.push_back(index);
    const Expr L = cas::unknown("L", index);
    std::vector<Expr> parts;
    if (terms.transport) parts = transport.build(index.l, index.m);
    if (terms.collision) parts.push_back(cas::field("sigma_t") * L);
    if (terms.scattering)
      parts.push_back(cas::product({cas::number(-sh::lambda(index.l)), cas::field("sigma_s"),
                                    cas::field("p", ShIndex{index.l, 0}), L}));
    if (terms.source) parts.push_back(cas::product({cas::number(-1.0), cas::field("Q", index)}));
    set.equations.push_back({index, cas::sum(std::move(parts))});
  }
  return set;
}

EquationSet build_cda(int dim) {
  require_dim(dim);
  EquationSet set;
  set.order = 0;
  set.dim = dim;
  const ShIndex i00{0, 0};
  const Expr L = cas::unknown("L", i00);
  const Expr sigma_t = cas::field("sigma_t");
  std::vector<Expr> parts;
  for (int axis = 0; axis < dim; ++axis)
    parts.push_back(cas::derivative(
        axis, cas::product({cas::number(1.0 / 3.0), cas::power(sigma_t, -1), cas::derivative(axis, L)})));
  const Expr absorption =
      sigma_t - cas::product({cas::number(sh::lambda(0)), cas::field("sigma_s"), cas::field("p", i00)});
  parts.push_back(cas::product({cas::number(-1.0), absorption, L}));
  parts.push_back(cas::field("Q", i00));
  set.unknowns.push_back(i00);
  set.equations.push_back({i00, cas::sum(std::move(parts))});
  return set;
}

std::string dump_equations(const EquationSet& set) {
  std::ostringstream os;
  for (const auto& eq : set.equations)
    os << "L[" << eq.index.l << "," << eq.index.m << "]: " << cas::to_pretty(eq.expr) << " = 0\n";
  return os.str();
}

}  // namespace pnsolver
