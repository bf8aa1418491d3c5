#pragma once

// Conjugate gradients on the normal equations A^T A u = A^T Q.

#include <span>
#include <vector>

#include "pnsolver/assembly.hpp"

namespace pnsolver {

struct SolveOptions {
  double tol = 1e-10;         // on ||A^T(Q - A u)|| / ||A^T Q||
  double primal_tol = 0.0;    // if > 0, also require ||Q - A u|| / ||Q|| <= primal_tol
  int max_iter = 100000;
  bool jacobi = false;        // diagonal preconditioner on A^T A
};

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  double normal_residual = 0.0;
  double primal_residual = 0.0;  // recomputed from the final iterate
  double wall_seconds = 0.0;
  std::vector<double> normal_history;  // one entry per iteration, starting with the initial guess
  std::vector<double> primal_history;
};

/// Deterministic dot product: fixed-size chunks summed in order.
double dot(std::span<const double> a, std::span<const double> b);

/// Starts from u = 0. Non-convergence is reported, not thrown.
SolveReport solve_normal_cg(const SparseSystem& sys, std::vector<double>& u, const SolveOptions& options = {});

/// ||Q - A u|| / ||Q||.
double primal_residual(const SparseSystem& sys, std::span<const double> u);

}  // namespace pnsolver
