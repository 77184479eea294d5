#pragma once

/**
 * @file csr.hpp
 * @brief Compressed sparse row matrices and the handful of kernels the rest
 *        of the toolkit is built on.
 *
 * Matrices are kept canonical at all times: within each row the column
 * indices are strictly increasing and duplicate-free. Entries not stored are
 * semantically zero. All values are 64-bit doubles.
 */

#include <cstdint>
#include <string>
#include <vector>

#include "npsolve/vec.hpp"

namespace npsolve {

struct Triplet {
  int row;
  int col;
  double value;
};

class CsrMatrix {
 public:
  CsrMatrix() = default;

  /// Builds a canonical matrix from coordinate triplets. Triplets may arrive
  /// in any order; duplicates are merged by summation.
  static CsrMatrix from_triplets(int n_rows, int n_cols,
                                 std::vector<Triplet> triplets);

  int n_rows() const { return n_rows_; }
  int n_cols() const { return n_cols_; }
  std::int64_t nnz() const { return static_cast<std::int64_t>(values_.size()); }

  const std::vector<std::int64_t>& row_offsets() const { return row_offsets_; }
  const std::vector<int>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Stored entry (i, j), or 0 when absent.
  double at(int i, int j) const;

  /// Main diagonal as a dense vector (absent entries are 0).
  DenseVector diagonal() const;

 private:
  int n_rows_ = 0;
  int n_cols_ = 0;
  std::vector<std::int64_t> row_offsets_{0};
  std::vector<int> col_indices_;
  std::vector<double> values_;
};

/// y = A x
DenseVector spmv(const CsrMatrix& A, const DenseVector& x);

/// y = A^T x
DenseVector spmv_transpose(const CsrMatrix& A, const DenseVector& x);

/// sqrt(x^T A x). Throws when the quadratic form is negative beyond a small
/// roundoff allowance, since callers rely on A being SPD.
double energy_norm(const CsrMatrix& A, const DenseVector& x);

/// Checks stored entries against their transposed counterparts (absent
/// entries compare as zero).
bool is_symmetric(const CsrMatrix& A, double tol);

}  // namespace npsolve
