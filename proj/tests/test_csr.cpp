#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "npsolve/csr.hpp"
#include "npsolve/vec.hpp"

using namespace npsolve;

TEST_CASE("from_triplets sorts columns and merges duplicates") {
  // Shuffled triplets with a duplicate on (1, 0) that must sum to 5.
  std::vector<Triplet> t = {
      {1, 2, 3.0}, {0, 1, 2.0}, {1, 0, 4.0}, {0, 0, 1.0}, {1, 0, 1.0}};
  const CsrMatrix A = CsrMatrix::from_triplets(2, 3, t);

  CHECK(A.n_rows() == 2);
  CHECK(A.n_cols() == 3);
  CHECK(A.nnz() == 4);
  CHECK(A.row_offsets() == std::vector<std::int64_t>{0, 2, 4});
  CHECK(A.col_indices() == std::vector<int>{0, 1, 0, 2});
  CHECK(A.values() == std::vector<double>{1.0, 2.0, 5.0, 3.0});
}

TEST_CASE("at returns stored entries and zero for absent ones") {
  const CsrMatrix A = CsrMatrix::from_triplets(2, 2, {{0, 1, 7.0}});
  CHECK(A.at(0, 1) == 7.0);
  CHECK(A.at(0, 0) == 0.0);
  CHECK(A.at(1, 1) == 0.0);
  CHECK_THROWS_AS(A.at(2, 0), std::invalid_argument);
}

TEST_CASE("from_triplets rejects out-of-range indices") {
  CHECK_THROWS_AS(CsrMatrix::from_triplets(2, 2, {{2, 0, 1.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(CsrMatrix::from_triplets(2, 2, {{0, -1, 1.0}}),
                  std::invalid_argument);
}

TEST_CASE("spmv matches a hand-computed product") {
  // A = [1 2 0; 0 3 4], x = (1, 2, 3) -> (5, 18)
  const CsrMatrix A = CsrMatrix::from_triplets(
      2, 3, {{0, 0, 1.0}, {0, 1, 2.0}, {1, 1, 3.0}, {1, 2, 4.0}});
  const DenseVector y = spmv(A, {1.0, 2.0, 3.0});
  CHECK(y == DenseVector{5.0, 18.0});
  CHECK_THROWS_AS(spmv(A, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("spmv_transpose matches the explicit transpose") {
  const CsrMatrix A = CsrMatrix::from_triplets(
      2, 3, {{0, 0, 1.0}, {0, 1, 2.0}, {1, 1, 3.0}, {1, 2, 4.0}});
  // A^T y with y = (1, 2): (1, 2 + 6, 8)
  const DenseVector x = spmv_transpose(A, {1.0, 2.0});
  CHECK(x == DenseVector{1.0, 8.0, 8.0});
  CHECK_THROWS_AS(spmv_transpose(A, {1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("diagonal extracts the main diagonal with zeros for gaps") {
  const CsrMatrix A =
      CsrMatrix::from_triplets(3, 3, {{0, 0, 2.0}, {2, 2, 5.0}, {0, 1, 9.0}});
  CHECK(A.diagonal() == DenseVector{2.0, 0.0, 5.0});
}

namespace {

CsrMatrix laplacian1d(int n) {
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0});
    if (i > 0) t.push_back({i, i - 1, -1.0});
    if (i + 1 < n) t.push_back({i, i + 1, -1.0});
  }
  return CsrMatrix::from_triplets(n, n, t);
}

}  // namespace

TEST_CASE("energy norm is sqrt(x^T A x)") {
  const CsrMatrix A = laplacian1d(3);
  // x = (1,1,1): A x = (1,0,1), x^T A x = 2.
  CHECK(energy_norm(A, {1.0, 1.0, 1.0}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(energy_norm(A, {0.0, 0.0, 0.0}) == 0.0);
}

TEST_CASE("energy norm rejects clearly indefinite quadratic forms") {
  const CsrMatrix A = CsrMatrix::from_triplets(1, 1, {{0, 0, -1.0}});
  // A negative form is a numerical failure of the SPD contract, in the same
  // class as a Krylov breakdown.
  CHECK_THROWS_AS(energy_norm(A, {1.0}), std::runtime_error);
}

TEST_CASE("is_symmetric distinguishes symmetric from unsymmetric") {
  CHECK(is_symmetric(laplacian1d(5), 0.0));
  const CsrMatrix B =
      CsrMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 2.0}});
  CHECK(!is_symmetric(B, 1e-12));
  // Symmetric values but a rectangular shape.
  const CsrMatrix R = CsrMatrix::from_triplets(2, 3, {{0, 0, 1.0}});
  CHECK(!is_symmetric(R, 1e-12));
}

TEST_CASE("vector helpers validate sizes") {
  CHECK(dot({1.0, 2.0}, {3.0, 4.0}) == 11.0);
  CHECK(norm2({3.0, 4.0}) == doctest::Approx(5.0));
  CHECK_THROWS_AS(dot({1.0}, {1.0, 2.0}), std::invalid_argument);
  DenseVector y = {1.0, 1.0};
  axpy(2.0, {1.0, 2.0}, y);
  CHECK(y == DenseVector{3.0, 5.0});
}
