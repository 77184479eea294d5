#include "npsolve/stationary.hpp"

#include <stdexcept>

namespace npsolve {

StationaryPreconditioner::StationaryPreconditioner(const CsrMatrix& A,
                                                   StationaryKind kind,
                                                   int sweeps, double omega)
    : A_(A), kind_(kind), sweeps_(sweeps), omega_(omega) {
  if (A.n_rows() != A.n_cols())
    throw std::invalid_argument("StationaryPreconditioner: matrix not square");
  if (sweeps < 0)
    throw std::invalid_argument("StationaryPreconditioner: sweeps must be >= 0");
  if (kind == StationaryKind::Sor && !(omega > 0.0 && omega < 2.0))
    throw std::invalid_argument("SOR requires 0 < omega < 2");
  if (kind == StationaryKind::Jacobi && !(omega > 0.0 && omega <= 1.0))
    throw std::invalid_argument("Jacobi damping requires 0 < omega <= 1");
  inv_diag_.resize(static_cast<std::size_t>(A.n_rows()));
  DenseVector d = A.diagonal();
  for (int i = 0; i < A.n_rows(); ++i) {
    if (d[i] == 0.0)
      throw std::invalid_argument(
          "StationaryPreconditioner: zero diagonal entry");
    inv_diag_[i] = 1.0 / d[i];
  }
}

std::string StationaryPreconditioner::name() const {
  switch (kind_) {
    case StationaryKind::Jacobi: return "jacobi";
    case StationaryKind::GaussSeidel: return "gs";
    case StationaryKind::Sor: return "sor";
  }
  return "?";
}

void StationaryPreconditioner::sweep(DenseVector& z,
                                     const DenseVector& r) const {
  const auto& off = A_.row_offsets();
  const auto& col = A_.col_indices();
  const auto& val = A_.values();
  int n = A_.n_rows();
  switch (kind_) {
    case StationaryKind::Jacobi: {
      DenseVector Az = spmv(A_, z);
      for (int i = 0; i < n; ++i)
        z[i] += omega_ * inv_diag_[i] * (r[i] - Az[i]);
      break;
    }
    case StationaryKind::GaussSeidel:
    case StationaryKind::Sor: {
      double w = kind_ == StationaryKind::GaussSeidel ? 1.0 : omega_;
      // Forward substitution with updated values used as soon as computed.
      for (int i = 0; i < n; ++i) {
        double s = r[i];
        double diag = 0.0;
        for (std::int64_t k = off[i]; k < off[i + 1]; ++k) {
          if (col[k] == i)
            diag = val[k];
          else
            s -= val[k] * z[col[k]];
        }
        double z_new = s / diag;
        z[i] = (1.0 - w) * z[i] + w * z_new;
      }
      break;
    }
  }
}

DenseVector StationaryPreconditioner::apply(const DenseVector& r) const {
  if (static_cast<int>(r.size()) != A_.n_rows())
    throw std::invalid_argument("StationaryPreconditioner: size mismatch");
  DenseVector z(r.size(), 0.0);
  for (int s = 0; s < sweeps_; ++s) sweep(z, r);
  return z;
}

}  // namespace npsolve
