#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "npsolve/csr.hpp"

namespace npsolve {

/// Largest dense conversion allowed anywhere in the toolkit; beyond this the
/// dense paths (oracles, coarse factorizations) refuse to run.
inline constexpr std::int64_t kDenseGuard = 4096LL * 4096LL;

/// Expands a sparse matrix to dense storage. Intended for oracles and
/// analysis at small sizes, guarded against accidental large expansions.
inline Eigen::MatrixXd dense_from_csr(const CsrMatrix& A) {
  if (static_cast<std::int64_t>(A.n_rows()) * A.n_cols() > kDenseGuard)
    throw std::invalid_argument(
        "dense_from_csr: matrix too large for dense expansion");
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(A.n_rows(), A.n_cols());
  const auto& off = A.row_offsets();
  const auto& col = A.col_indices();
  const auto& val = A.values();
  for (int i = 0; i < A.n_rows(); ++i)
    for (std::int64_t k = off[i]; k < off[i + 1]; ++k)
      D(i, col[k]) = val[k];
  return D;
}

inline Eigen::VectorXd to_eigen(const DenseVector& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

inline DenseVector from_eigen(const Eigen::VectorXd& v) {
  return DenseVector(v.data(), v.data() + v.size());
}

}  // namespace npsolve
