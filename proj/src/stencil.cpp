#include "pnsolver/stencil.hpp"

#include <deque>
#include <set>
#include <sstream>

#include "pnsolver/errors.hpp"
#include "pnsolver/render.hpp"

namespace pnsolver {

using cas::Expr;
using cas::Kind;

namespace {

struct Edge {
  ShIndex from;
  ShIndex to;
  int axis;
};

// Top-level derivative-of-unknown terms only; nested operators (diffusion)
// do not constrain the placement.
void collect_edges(const Expr& e, ShIndex from, std::vector<Edge>& edges) {
  if (e.is(Kind::derivative)) {
    if (e.child(0).is(Kind::unknown)) edges.push_back({from, *e.child(0).index(), e.axis()});
    return;
  }
  for (const auto& c : e.children()) collect_edges(c, from, edges);
}

Expr sample_leaf(const Expr& leaf, const Position& at, const Position& home) {
  std::vector<int> mismatched;
  for (int k = 0; k < 3; ++k)
    if ((at[static_cast<size_t>(k)] - home[static_cast<size_t>(k)]) % 2 != 0) mismatched.push_back(k);
  if (mismatched.empty()) return cas::at(leaf, at);
  const int n = static_cast<int>(mismatched.size());
  std::vector<Expr> sites;
  for (int mask = 0; mask < (1 << n); ++mask) {
    Position p = at;
    for (int b = 0; b < n; ++b) p[static_cast<size_t>(mismatched[static_cast<size_t>(b)])] += (mask >> b & 1) ? 1 : -1;
    sites.push_back(cas::at(leaf, p));
  }
  return cas::product({cas::number(1.0 / (1 << n)), cas::sum(std::move(sites))});
}

Expr rebuild(const Expr& e, std::vector<Expr> children) {
  switch (e.kind()) {
    case Kind::add:
      return cas::sum(std::move(children));
    case Kind::mul:
      return cas::product(std::move(children));
    case Kind::power:
      return cas::power(std::move(children[0]), e.exponent());
    case Kind::delta:
      return cas::kronecker_delta(std::move(children[0]), std::move(children[1]));
    default:
      return e;
  }
}

void collect_fields(const Expr& e, std::set<FieldKey>& keys) {
  if (e.is(Kind::field)) {
    const auto& p = *e.position();
    VoxelOffset v{};
    for (int k = 0; k < 3; ++k) {
      if (p[static_cast<size_t>(k)] % 2 != 0) throw Error("field sample off the voxel-centre grid: " + cas::to_pretty(e));
      v[static_cast<size_t>(k)] = p[static_cast<size_t>(k)] / 2;
    }
    keys.insert({e.name(), e.index(), v});
    return;
  }
  for (const auto& c : e.children()) collect_fields(c, keys);
}

std::string position_text(const std::array<int, 3>& p) {
  return "(" + std::to_string(p[0]) + "," + std::to_string(p[1]) + "," + std::to_string(p[2]) + ")";
}

std::string index_text(ShIndex i) { return "L[" + std::to_string(i.l) + "," + std::to_string(i.m) + "]"; }

}  // namespace

const Position& StaggeredPlacement::offset(ShIndex index) const {
  const auto it = offsets.find(index);
  if (it == offsets.end()) throw PlacementError("no placement for " + sh::to_string(index));
  return it->second;
}

int StaggeredPlacement::grid_count() const {
  std::set<Position> grids;
  for (const auto& [index, p] : offsets) grids.insert(p);
  return static_cast<int>(grids.size());
}

StaggeredPlacement assign_placement(const EquationSet& set) {
  std::map<ShIndex, std::vector<std::pair<ShIndex, int>>> graph;
  for (const auto& eq : set.equations) {
    std::vector<Edge> edges;
    collect_edges(eq.expr, eq.index, edges);
    for (const auto& e : edges) {
      if (e.axis >= set.dim) throw PlacementError("derivative along axis " + std::to_string(e.axis) + " in " + std::to_string(set.dim) + "D");
      graph[e.from].push_back({e.to, e.axis});
      graph[e.to].push_back({e.from, e.axis});
    }
  }

  StaggeredPlacement placement;
  placement.dim = set.dim;
  const ShIndex seed{0, 0};
  std::deque<ShIndex> queue;
  placement.offsets[seed] = {0, 0, 0};
  queue.push_back(seed);
  while (!queue.empty()) {
    const ShIndex u = queue.front();
    queue.pop_front();
    const Position pu = placement.offsets.at(u);
    for (const auto& [v, axis] : graph[u]) {
      Position pv = pu;
      pv[static_cast<size_t>(axis)] ^= 1;
      const auto it = placement.offsets.find(v);
      if (it == placement.offsets.end()) {
        placement.offsets[v] = pv;
        queue.push_back(v);
      } else if (it->second != pv) {
        throw PlacementError("staggering conflict at " + sh::to_string(v) + " via axis " + std::to_string(axis) +
                             " from " + sh::to_string(u));
      }
    }
  }
  for (const auto& index : set.unknowns) placement.offsets.try_emplace(index, Position{0, 0, 0});
  return placement;
}

Expr spacing_symbol() { return cas::symbol("h"); }

Expr discretize_expr(const Expr& e, const Position& at, const StaggeredPlacement& placement) {
  switch (e.kind()) {
    case Kind::number:
    case Kind::symbol:
      return e;
    case Kind::unknown:
      if (e.position()) return e;
      return sample_leaf(e, at, placement.offset(*e.index()));
    case Kind::field:
      if (e.position()) return e;
      return sample_leaf(e, at, Position{0, 0, 0});
    case Kind::derivative: {
      const auto k = static_cast<size_t>(e.axis());
      Position plus = at;
      Position minus = at;
      plus[k] += 1;
      minus[k] -= 1;
      const Expr difference = cas::sum({discretize_expr(e.child(0), plus, placement),
                                        cas::product({cas::number(-1.0), discretize_expr(e.child(0), minus, placement)})});
      return cas::product({difference, cas::power(spacing_symbol(), -1)});
    }
    default: {
      std::vector<Expr> children;
      for (const auto& c : e.children()) children.push_back(discretize_expr(c, at, placement));
      return rebuild(e, std::move(children));
    }
  }
}

std::vector<DiscreteRow> discretize(const EquationSet& set, const StaggeredPlacement& placement) {
  std::vector<DiscreteRow> rows;
  rows.reserve(set.equations.size());
  for (const auto& eq : set.equations) {
    const Position& at = placement.offset(eq.index);
    rows.push_back({eq.index, at, discretize_expr(eq.expr, at, placement)});
  }
  return rows;
}

std::string to_string(const FieldKey& key) {
  std::string s = key.name;
  if (key.index) s += "[" + std::to_string(key.index->l) + "," + std::to_string(key.index->m) + "]";
  return s + position_text(key.offset);
}

StencilProgram compile(const EquationSet& set, const StaggeredPlacement& placement,
                       const std::vector<DiscreteRow>& rows) {
  StencilProgram program;
  program.order = set.order;
  program.dim = set.dim;
  program.placement = placement;
  program.unknowns = set.unknowns;

  std::set<FieldKey> keys;
  for (const auto& row : rows) {
    StencilRow out;
    out.equation = row.equation;
    out.unknown = set.unknown_index(row.equation);
    out.at = row.at;
    out.form = cas::factorize_canonical(row.expr);
    for (const auto& entry : out.form.entries) {
      const ShIndex target = *entry.unknown.index();
      const Position& home = placement.offset(target);
      const Position& p = *entry.unknown.position();
      VoxelOffset v{};
      for (int k = 0; k < 3; ++k) {
        const int d = p[static_cast<size_t>(k)] - home[static_cast<size_t>(k)];
        if (d % 2 != 0) throw Error("unknown sampled off its home grid: " + cas::to_pretty(entry.unknown));
        v[static_cast<size_t>(k)] = d / 2;
      }
      collect_fields(entry.coefficient, keys);
      out.entries.push_back({target, set.unknown_index(target), v, entry.coefficient, {}});
    }
    collect_fields(out.form.residual, keys);
    out.rhs = cas::product({cas::number(-1.0), out.form.residual});
    program.rows.push_back(std::move(out));
  }

  program.field_keys.assign(keys.begin(), keys.end());
  std::map<FieldKey, int> slot_of;
  for (std::size_t i = 0; i < program.field_keys.size(); ++i) slot_of[program.field_keys[i]] = static_cast<int>(i);
  const int h_slot = program.h_slot();
  const auto resolver = [&](const Expr& leaf) -> int {
    if (leaf.is(Kind::symbol)) {
      if (leaf.name() == "h") return h_slot;
      throw UnboundSymbolError(leaf.name());
    }
    if (!leaf.is(Kind::field)) throw Error("stencil coefficient references a non-field leaf: " + cas::to_pretty(leaf));
    const auto& p = *leaf.position();
    return slot_of.at({leaf.name(), leaf.index(), {p[0] / 2, p[1] / 2, p[2] / 2}});
  };
  for (auto& row : program.rows) {
    for (auto& entry : row.entries) entry.code = cas::FlatExpr(entry.coefficient, resolver);
    row.rhs_code = cas::FlatExpr(row.rhs, resolver);
  }
  return program;
}

StencilProgram compile(const EquationSet& set) {
  const StaggeredPlacement placement = assign_placement(set);
  return compile(set, placement, discretize(set, placement));
}

void evaluate_row(const StencilRow& row, std::span<const double> slots, std::span<double> coefficients,
                  double& rhs, std::vector<double>& stack) {
  for (std::size_t i = 0; i < row.entries.size(); ++i) coefficients[i] = row.entries[i].code.evaluate(slots, stack);
  rhs = row.rhs_code.evaluate(slots, stack);
}

std::string dump_stencil(const StencilProgram& program) {
  std::ostringstream os;
  os << "order " << program.order << " dim " << program.dim << " grids " << program.placement.grid_count() << "\n";
  os << "placement\n";
  for (const auto& index : program.unknowns)
    os << "  " << index_text(index) << " " << position_text(program.placement.offset(index)) << "\n";
  for (const auto& row : program.rows) {
    os << "row " << index_text(row.equation) << " at " << position_text(row.at) << "\n";
    for (const auto& e : row.entries)
      os << "  " << index_text(e.target) << " voxel" << position_text(e.voxel_offset) << ": "
         << cas::to_pretty(e.coefficient) << "\n";
    os << "  rhs: " << cas::to_pretty(cas::expand_fold(row.rhs)) << "\n";
  }
  return os.str();
}

std::string emit_source(const StencilProgram& program, const std::string& namespace_name) {
  std::map<FieldKey, int> slot_of;
  for (std::size_t i = 0; i < program.field_keys.size(); ++i) slot_of[program.field_keys[i]] = static_cast<int>(i);
  const cas::LeafRenderer leaf = [&](const Expr& e) -> std::string {
    if (e.is(Kind::symbol)) {
      if (e.name() == "h") return "h";
      throw UnboundSymbolError(e.name());
    }
    if (!e.is(Kind::field)) throw Error("emit_source: unexpected leaf " + cas::to_pretty(e));
    const auto& p = *e.position();
    return "sample(" + std::to_string(slot_of.at({e.name(), e.index(), {p[0] / 2, p[1] / 2, p[2] / 2}})) + ")";
  };

  std::ostringstream os;
  os << "// Generated by pnsolver codegen. Do not edit.\n"
     << "#pragma once\n\n#include <cmath>\n\n"
     << "namespace " << namespace_name << " {\n\n"
     << "inline constexpr int order = " << program.order << ";\n"
     << "inline constexpr int dim = " << program.dim << ";\n"
     << "inline constexpr int row_count = " << program.rows.size() << ";\n"
     << "inline constexpr int slot_count = " << program.slot_count() << ";\n\n";
  for (std::size_t r = 0; r < program.rows.size(); ++r)
    os << cas::emit_canonical_routine(program.rows[r].form, "row_" + std::to_string(r), leaf) << "\n";
  os << "template <class Sample>\n"
     << "inline void evaluate_row(int row, const Sample& sample, double h, double* coefficients, double& residual) {\n"
     << "  switch (row) {\n";
  for (std::size_t r = 0; r < program.rows.size(); ++r)
    os << "    case " << r << ": row_" << r << "(sample, h, coefficients, residual); return;\n";
  os << "    default: return;\n  }\n}\n\n}  // namespace " << namespace_name << "\n";
  return os.str();
}

}  // namespace pnsolver
