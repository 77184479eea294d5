#pragma once

/**
 * @file two_grid.hpp
 * @brief Geometric two-grid preconditioner: smoothing plus an exact coarse
 *        correction through a Galerkin coarse operator.
 *
 * One application runs pre-smoothing sweeps, adds P Ac^{-1} P^T of the
 * current residual, then post-smoothing sweeps. The coarse operator
 * Ac = P^T A P is factorized densely once (Cholesky); deeper hierarchies are
 * out of scope, so the coarse size is guarded.
 */

#include <Eigen/Dense>
#include <memory>

#include "npsolve/csr.hpp"
#include "npsolve/pde.hpp"
#include "npsolve/preconditioner.hpp"
#include "npsolve/stationary.hpp"

namespace npsolve {

/// Linear (1D) or bilinear (2D) interpolation from the standard coarsening
/// of a structured grid: coarse node j along an axis anchors at fine index
/// 2j+1. Interleaved systems (dofs_per_node > 1) interpolate each component
/// independently. Returns an n_fine x n_coarse matrix.
CsrMatrix build_interpolation(const GridSpec& grid, int dofs_per_node = 1);

class TwoGridPreconditioner final : public Preconditioner {
 public:
  /// Builds the standard geometric hierarchy for a structured grid with
  /// damped Jacobi smoothing (omega defaults to 2/3).
  TwoGridPreconditioner(const CsrMatrix& A, const GridSpec& grid,
                        int dofs_per_node = 1, int pre_sweeps = 1,
                        int post_sweeps = 1,
                        StationaryKind smoother = StationaryKind::Jacobi,
                        double omega = 2.0 / 3.0);

  /// Same cycle with a caller-supplied interpolation operator.
  TwoGridPreconditioner(const CsrMatrix& A, CsrMatrix P, int pre_sweeps,
                        int post_sweeps, StationaryKind smoother,
                        double omega);

  DenseVector apply(const DenseVector& r) const override;
  bool claims_spd() const override;
  std::string name() const override { return "twogrid"; }

  const CsrMatrix& interpolation() const { return P_; }
  const Eigen::MatrixXd& coarse_matrix() const { return Ac_; }

 private:
  void setup();

  const CsrMatrix& A_;
  CsrMatrix P_;
  int pre_sweeps_;
  int post_sweeps_;
  StationaryKind smoother_kind_;
  StationaryPreconditioner smoother_;
  Eigen::MatrixXd Ac_;
  Eigen::LLT<Eigen::MatrixXd> coarse_solver_;
};

}  // namespace npsolve
