#pragma once

/**
 * @file krylov.hpp
 * @brief Preconditioned conjugate gradients and restarted GMRES with
 *        per-iteration residual traces and optional trajectory recording.
 *
 * Both solvers start from x0 = 0 and declare convergence on the true
 * relative residual ||b - A x||_2 / ||b||_2 <= tol. Iteration counting: one
 * preconditioned matvec is one iteration; the initial residual check is
 * iteration 0 and is not counted.
 *
 * gmres_solve runs the restarted left-preconditioned algorithm for linear
 * preconditioners. When the preconditioner reports is_linear() == false
 * there is no fixed preconditioned operator to build a Krylov space from, so
 * the solver switches to the flexible variant: each application becomes its
 * own direction, the least squares minimizes the true residual over those
 * directions, and an exhausted subspace restarts the cycle about the current
 * iterate instead of failing.
 */

#include <cstdint>
#include <vector>

#include "npsolve/csr.hpp"
#include "npsolve/preconditioner.hpp"
#include "npsolve/vec.hpp"

namespace npsolve {

struct SolveConfig {
  double tol = 1e-10;
  int max_iters = 1000;
  int restart = 0;  // GMRES cycle length; 0 means restart = max_iters
  bool record_trajectory = false;
  int record_stride = 1;
};

struct Snapshot {
  int k = 0;
  DenseVector x;
  DenseVector r;  // recomputed as b - A x
};

struct SolveTrace {
  bool converged = false;
  int iterations = 0;
  DenseVector x;
  /// True residual norms ||b - A x_k||_2, entry k for iteration k, so the
  /// length is iterations + 1 and entry 0 is ||b||.
  std::vector<double> residual_norms;
  /// GMRES least-squares objectives, non-increasing within a restart cycle:
  /// preconditioned residual norms on the left-preconditioned path, true
  /// residual norms on the flexible (nonlinear) path.
  std::vector<double> precond_residual_norms;
  std::vector<Snapshot> snapshots;
};

SolveTrace cg_solve(const CsrMatrix& A, const DenseVector& b,
                    const Preconditioner& M, const SolveConfig& cfg);

SolveTrace gmres_solve(const CsrMatrix& A, const DenseVector& b,
                       const Preconditioner& M, const SolveConfig& cfg);

/// Runs GMRES with trajectory recording on and returns the trace. Snapshots
/// land at every record_stride-th iteration (including iteration 0) plus the
/// final iterate.
SolveTrace record_dataset(const CsrMatrix& A, const DenseVector& b,
                          const Preconditioner& M, SolveConfig cfg);

}  // namespace npsolve
