#pragma once

// Sparse system assembly from a compiled stencil program.

#include <span>
#include <vector>

#include "pnsolver/problems.hpp"
#include "pnsolver/stencil.hpp"

namespace pnsolver {

/// Compressed sparse row matrix.
struct CsrMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<int> col;
  std::vector<double> val;

  std::size_t nonzeros() const { return val.size(); }
  /// y = A x. Rows are independent, so the result does not depend on threads.
  void multiply(std::span<const double> x, std::span<double> y) const;
  CsrMatrix transpose() const;
  double at(int r, int c) const;
};

/// A u = Q with row = voxel * U + unknown (voxel x fastest). At is the
/// explicit transpose used for the normal-equation products.
struct SparseSystem {
  CsrMatrix A;
  CsrMatrix At;
  std::vector<double> Q;
  GridSpec grid;
  int unknowns_per_voxel = 0;
};

/// Evaluates every stencil row at every voxel and scatters the coefficients.
/// Out-of-domain unknown writes are dropped (Dirichlet) or redirected to the
/// nearest in-domain voxel of the same unknown (Neumann). Field samples outside
/// the domain take the nearest in-domain value.
SparseSystem assemble(const StencilProgram& program, const ProblemSpec& problem, Boundary bc);

/// Assemble with the problem's own boundary condition.
SparseSystem assemble(const StencilProgram& program, const ProblemSpec& problem);

/// Slot values of every field key at voxel (i,j,k) (h in the last slot).
void gather_slots(const StencilProgram& program, const ProblemSpec& problem, int i, int j, int k,
                  std::span<double> slots);

}  // namespace pnsolver
