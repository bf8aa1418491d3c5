#pragma once

// Staggered-grid discretisation of an equation set and its compiled form.
//
// Stencil space is the frame of a hypothetical centre voxel at the origin.
// Positions are in doubled units: voxel v of an unknown with grid offset o
// sits at 2v+o, so offset 1 along an axis is the face half a voxel towards +.
// Parameter fields live at voxel centres (offset 0).

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pnsolver/expr.hpp"
#include "pnsolver/manip.hpp"
#include "pnsolver/pn_builder.hpp"

namespace pnsolver {

using cas::Position;
using VoxelOffset = std::array<int, 3>;

struct StaggeredPlacement {
  int dim = 3;
  std::map<ShIndex, Position> offsets;  // components in {0,1}

  const Position& offset(ShIndex index) const;
  /// Number of distinct grids in use.
  int grid_count() const;
};

/// Joint parity colouring of the coupling graph: an axis-k derivative between
/// two unknowns puts them on grids that differ along k only. (0,0) is pinned
/// to the voxel centre. Throws PlacementError if the colouring is infeasible.
StaggeredPlacement assign_placement(const EquationSet& set);

/// One equation discretised at the home location of its unknown.
struct DiscreteRow {
  ShIndex equation;
  Position at;
  cas::Expr expr;  // unknowns and fields all carry positions; h is a symbol
};

/// The grid-spacing symbol used in discrete rows.
cas::Expr spacing_symbol();

std::vector<DiscreteRow> discretize(const EquationSet& set, const StaggeredPlacement& placement);

/// Discretise a single expression at stencil location `at`.
cas::Expr discretize_expr(const cas::Expr& e, const Position& at, const StaggeredPlacement& placement);

/// A parameter-field sample relative to the row's voxel.
struct FieldKey {
  std::string name;
  std::optional<ShIndex> index;
  VoxelOffset offset{};

  friend auto operator<=>(const FieldKey&, const FieldKey&) = default;
  friend bool operator==(const FieldKey&, const FieldKey&) = default;
};

std::string to_string(const FieldKey& key);

struct StencilEntry {
  ShIndex target;
  int target_unknown = 0;
  VoxelOffset voxel_offset{};
  cas::Expr coefficient;
  cas::FlatExpr code;
};

struct StencilRow {
  ShIndex equation;
  int unknown = 0;
  Position at;
  std::vector<StencilEntry> entries;
  cas::Expr rhs;  // right-hand side of A u = Q
  cas::FlatExpr rhs_code;
  cas::CanonicalForm form;
};

/// Rows in unknown order. Coefficients reference fields through slots: slot i
/// is field_keys[i], the last slot is h.
struct StencilProgram {
  int order = 0;
  int dim = 3;
  StaggeredPlacement placement;
  std::vector<ShIndex> unknowns;
  std::vector<StencilRow> rows;
  std::vector<FieldKey> field_keys;

  int slot_count() const { return static_cast<int>(field_keys.size()) + 1; }
  int h_slot() const { return static_cast<int>(field_keys.size()); }
};

StencilProgram compile(const EquationSet& set, const StaggeredPlacement& placement,
                       const std::vector<DiscreteRow>& rows);

/// Convenience: placement, discretisation and compilation in one go.
StencilProgram compile(const EquationSet& set);

/// Interpreted evaluation of one row. `slots` holds a value for every slot.
void evaluate_row(const StencilRow& row, std::span<const double> slots, std::span<double> coefficients,
                  double& rhs, std::vector<double>& stack);

/// Text dump: placement, then each row with its entries and right-hand side.
std::string dump_stencil(const StencilProgram& program);

/// C++ header with one straight-line routine per row plus a dispatch table.
/// Generated routines read fields through `sample(slot)`.
std::string emit_source(const StencilProgram& program, const std::string& namespace_name);

}  // namespace pnsolver
