#include "npsolve/csr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace npsolve {

CsrMatrix CsrMatrix::from_triplets(int n_rows, int n_cols,
                                   std::vector<Triplet> triplets) {
  if (n_rows < 0 || n_cols < 0)
    throw std::invalid_argument("from_triplets: negative dimension");
  for (const Triplet& t : triplets) {
    if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols)
      throw std::invalid_argument("from_triplets: index out of range");
  }
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });

  CsrMatrix A;
  A.n_rows_ = n_rows;
  A.n_cols_ = n_cols;
  A.row_offsets_.assign(static_cast<std::size_t>(n_rows) + 1, 0);
  A.col_indices_.reserve(triplets.size());
  A.values_.reserve(triplets.size());

  std::size_t i = 0;
  for (int r = 0; r < n_rows; ++r) {
    while (i < triplets.size() && triplets[i].row == r) {
      int c = triplets[i].col;
      double v = triplets[i].value;
      ++i;
      while (i < triplets.size() && triplets[i].row == r &&
             triplets[i].col == c) {
        v += triplets[i].value;  // merge duplicates
        ++i;
      }
      A.col_indices_.push_back(c);
      A.values_.push_back(v);
    }
    A.row_offsets_[static_cast<std::size_t>(r) + 1] =
        static_cast<std::int64_t>(A.col_indices_.size());
  }
  return A;
}

double CsrMatrix::at(int i, int j) const {
  if (i < 0 || i >= n_rows_ || j < 0 || j >= n_cols_)
    throw std::invalid_argument("CsrMatrix::at: index out of range");
  auto begin = col_indices_.begin() + row_offsets_[i];
  auto end = col_indices_.begin() + row_offsets_[i + 1];
  auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

DenseVector CsrMatrix::diagonal() const {
  int n = std::min(n_rows_, n_cols_);
  DenseVector d(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) d[i] = at(i, i);
  return d;
}

DenseVector spmv(const CsrMatrix& A, const DenseVector& x) {
  if (static_cast<int>(x.size()) != A.n_cols())
    throw std::invalid_argument("spmv: dimension mismatch");
  DenseVector y(static_cast<std::size_t>(A.n_rows()), 0.0);
  const auto& off = A.row_offsets();
  const auto& col = A.col_indices();
  const auto& val = A.values();
  for (int i = 0; i < A.n_rows(); ++i) {
    double s = 0.0;
    for (std::int64_t k = off[i]; k < off[i + 1]; ++k)
      s += val[k] * x[col[k]];
    y[i] = s;
  }
  return y;
}

DenseVector spmv_transpose(const CsrMatrix& A, const DenseVector& x) {
  if (static_cast<int>(x.size()) != A.n_rows())
    throw std::invalid_argument("spmv_transpose: dimension mismatch");
  DenseVector y(static_cast<std::size_t>(A.n_cols()), 0.0);
  const auto& off = A.row_offsets();
  const auto& col = A.col_indices();
  const auto& val = A.values();
  for (int i = 0; i < A.n_rows(); ++i)
    for (std::int64_t k = off[i]; k < off[i + 1]; ++k)
      y[col[k]] += val[k] * x[i];
  return y;
}

double energy_norm(const CsrMatrix& A, const DenseVector& x) {
  if (A.n_rows() != A.n_cols())
    throw std::invalid_argument("energy_norm: matrix must be square");
  double q = dot(x, spmv(A, x));
  if (q < 0.0) {
    double scale = dot(x, x);
    if (q < -1e-10 * std::max(scale, 1.0))
      throw std::runtime_error(
          "energy_norm: quadratic form is negative, matrix is not SPD");
    q = 0.0;  // roundoff-level negative
  }
  return std::sqrt(q);
}

bool is_symmetric(const CsrMatrix& A, double tol) {
  if (A.n_rows() != A.n_cols()) return false;
  const auto& off = A.row_offsets();
  const auto& col = A.col_indices();
  const auto& val = A.values();
  for (int i = 0; i < A.n_rows(); ++i)
    for (std::int64_t k = off[i]; k < off[i + 1]; ++k)
      if (std::abs(val[k] - A.at(col[k], i)) > tol) return false;
  return true;
}

}  // namespace npsolve
