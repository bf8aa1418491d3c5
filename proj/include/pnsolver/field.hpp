#pragma once

// Solution fields: un-staggering, radiance reconstruction, PNFLD1 files and
// line profiles.
//
// PNFLD1 layout: text header lines
//
//   PNFLD1
//   dim <2|3>
//   resolution <nx> <ny> <nz>
//   unknowns <U>
//   order <N>
//   little_endian <0|1>
//
// followed by nx*ny*nz*U raw 64-bit floats, voxel-major (x fastest) and
// unknown-minor.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "pnsolver/problems.hpp"
#include "pnsolver/stencil.hpp"

namespace pnsolver {

struct SolutionField {
  GridSpec grid;
  int order = 0;
  std::vector<ShIndex> unknowns;
  std::vector<double> values;  // voxel * U + unknown
  bool collocated = false;
  StaggeredPlacement placement;  // meaningful while staggered

  int unknown_count() const { return static_cast<int>(unknowns.size()); }
  double& at(std::size_t voxel, int unknown) { return values[voxel * unknowns.size() + static_cast<size_t>(unknown)]; }
  double at(std::size_t voxel, int unknown) const { return values[voxel * unknowns.size() + static_cast<size_t>(unknown)]; }
};

SolutionField make_staggered_field(const StencilProgram& program, const GridSpec& grid, std::vector<double> values);

/// Interpolates every staggered coefficient to voxel centres (average of the
/// two face samples per staggered axis). Samples beyond the domain count as
/// zero under Dirichlet and as the nearest sample under Neumann.
SolutionField unstagger(const SolutionField& staggered, Boundary bc);

/// Trilinear interpolation of the collocated coefficients to `x`, then the
/// SH sum in direction `dir`. Throws DomainError outside the domain.
double reconstruct_radiance(const SolutionField& field, const std::array<double, 3>& x, const sh::Vec3& dir);

/// sqrt(4 pi) L00 of a collocated field, per voxel.
std::vector<double> fluence(const SolutionField& field);

struct ProfilePoint {
  double r;
  double value;
  double std_error = -1.0;  // negative when not available
};

/// Fluence along +x from the centre voxel.
std::vector<ProfilePoint> line_profile(const SolutionField& field);

void write_field(const std::string& path, const SolutionField& field);
SolutionField read_field(const std::string& path);

void write_profile_csv(const std::string& path, const std::vector<ProfilePoint>& profile);
std::vector<ProfilePoint> read_profile_csv(const std::string& path);

/// Linear interpolation in r; values outside the tabulated range throw.
double interpolate_profile(const std::vector<ProfilePoint>& profile, double r);

}  // namespace pnsolver
