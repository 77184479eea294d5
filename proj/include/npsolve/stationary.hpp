#pragma once

/// Stationary smoothers (Jacobi, Gauss-Seidel, SOR) exposed as
/// preconditioners: apply(r) runs a fixed number of sweeps on A z = r
/// starting from z = 0.

#include <string>

#include "npsolve/csr.hpp"
#include "npsolve/preconditioner.hpp"

namespace npsolve {

enum class StationaryKind { Jacobi, GaussSeidel, Sor };

class StationaryPreconditioner final : public Preconditioner {
 public:
  /// omega is only used by SOR (0 < omega < 2) and by damped Jacobi when
  /// damping != 1. Throws if A has a zero diagonal entry.
  StationaryPreconditioner(const CsrMatrix& A, StationaryKind kind,
                           int sweeps = 1, double omega = 1.0);

  DenseVector apply(const DenseVector& r) const override;
  bool claims_spd() const override { return kind_ == StationaryKind::Jacobi; }
  std::string name() const override;

  /// One in-place sweep of the underlying iteration, z <- z + N^{-1}(r - Az).
  /// Exposed so multigrid can smooth from a running iterate.
  void sweep(DenseVector& z, const DenseVector& r) const;

 private:
  const CsrMatrix& A_;
  StationaryKind kind_;
  int sweeps_;
  double omega_;
  DenseVector inv_diag_;
};

}  // namespace npsolve
