#include "npsolve/two_grid.hpp"

#include <stdexcept>

#include "npsolve/dense.hpp"

namespace npsolve {

namespace {

constexpr int kCoarseGuard = 4096;

// 1D interpolation weights (0.5, 1, 0.5) at fine rows (2j, 2j+1, 2j+2).
void interp_1d(int n, std::vector<Triplet>& t, int row_base, int col_base,
               int row_stride, int col_stride) {
  int m = (n - 1) / 2;
  if (m < 1)
    throw std::invalid_argument("build_interpolation: grid too small to coarsen");
  for (int j = 0; j < m; ++j) {
    int f = 2 * j + 1;
    t.push_back({row_base + (f - 1) * row_stride, col_base + j * col_stride, 0.5});
    t.push_back({row_base + f * row_stride, col_base + j * col_stride, 1.0});
    t.push_back({row_base + (f + 1) * row_stride, col_base + j * col_stride, 0.5});
  }
}

}  // namespace

CsrMatrix build_interpolation(const GridSpec& grid, int dofs_per_node) {
  grid.validate();
  if (dofs_per_node < 1)
    throw std::invalid_argument("build_interpolation: dofs_per_node must be >= 1");
  std::vector<Triplet> t;
  int n_fine_nodes = grid.num_nodes();
  int n_coarse_nodes = 0;

  if (grid.dims == 1) {
    int n = grid.sizes[0];
    int m = (n - 1) / 2;
    n_coarse_nodes = m;
    for (int c = 0; c < dofs_per_node; ++c)
      interp_1d(n, t, c, c, dofs_per_node, dofs_per_node);
  } else {
    int nx = grid.sizes[0], ny = grid.sizes[1];
    int mx = (nx - 1) / 2, my = (ny - 1) / 2;
    if (mx < 1 || my < 1)
      throw std::invalid_argument("build_interpolation: grid too small to coarsen");
    n_coarse_nodes = mx * my;
    // Bilinear 9-point weights: 1 at the anchor, 1/2 at edge neighbors,
    // 1/4 at corners.
    for (int cy = 0; cy < my; ++cy)
      for (int cx = 0; cx < mx; ++cx) {
        int fx = 2 * cx + 1, fy = 2 * cy + 1;
        int cnode = cy * mx + cx;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            double w = 1.0;
            if (dx != 0) w *= 0.5;
            if (dy != 0) w *= 0.5;
            int fnode = (fy + dy) * nx + (fx + dx);
            for (int c = 0; c < dofs_per_node; ++c)
              t.push_back({fnode * dofs_per_node + c,
                           cnode * dofs_per_node + c, w});
          }
      }
  }
  return CsrMatrix::from_triplets(n_fine_nodes * dofs_per_node,
                                  n_coarse_nodes * dofs_per_node,
                                  std::move(t));
}

TwoGridPreconditioner::TwoGridPreconditioner(const CsrMatrix& A,
                                             const GridSpec& grid,
                                             int dofs_per_node, int pre_sweeps,
                                             int post_sweeps,
                                             StationaryKind smoother,
                                             double omega)
    : A_(A),
      P_(build_interpolation(grid, dofs_per_node)),
      pre_sweeps_(pre_sweeps),
      post_sweeps_(post_sweeps),
      smoother_kind_(smoother),
      smoother_(A, smoother, 1, omega) {
  if (P_.n_rows() != A.n_rows())
    throw std::invalid_argument(
        "TwoGridPreconditioner: grid does not match the matrix size");
  setup();
}

TwoGridPreconditioner::TwoGridPreconditioner(const CsrMatrix& A, CsrMatrix P,
                                             int pre_sweeps, int post_sweeps,
                                             StationaryKind smoother,
                                             double omega)
    : A_(A),
      P_(std::move(P)),
      pre_sweeps_(pre_sweeps),
      post_sweeps_(post_sweeps),
      smoother_kind_(smoother),
      smoother_(A, smoother, 1, omega) {
  if (P_.n_rows() != A.n_rows())
    throw std::invalid_argument(
        "TwoGridPreconditioner: interpolation rows must match matrix size");
  setup();
}

void TwoGridPreconditioner::setup() {
  if (pre_sweeps_ < 0 || post_sweeps_ < 0)
    throw std::invalid_argument("TwoGridPreconditioner: negative sweep count");
  int m = P_.n_cols();
  if (m > kCoarseGuard)
    throw std::invalid_argument(
        "TwoGridPreconditioner: coarse system larger than the dense guard; "
        "multilevel recursion is out of scope");
  // Galerkin product, column by column: Ac e_j = P^T A P e_j.
  Ac_.resize(m, m);
  DenseVector ej(static_cast<std::size_t>(m), 0.0);
  for (int j = 0; j < m; ++j) {
    ej[j] = 1.0;
    DenseVector Pj = spmv(P_, ej);
    DenseVector APj = spmv(A_, Pj);
    DenseVector col = spmv_transpose(P_, APj);
    for (int i = 0; i < m; ++i) Ac_(i, j) = col[i];
    ej[j] = 0.0;
  }
  coarse_solver_ = Ac_.llt();
  if (coarse_solver_.info() != Eigen::Success)
    throw std::runtime_error(
        "TwoGridPreconditioner: Galerkin coarse matrix is not SPD");
}

bool TwoGridPreconditioner::claims_spd() const {
  // Symmetric smoother applied the same number of times on both sides.
  return smoother_kind_ == StationaryKind::Jacobi &&
         pre_sweeps_ == post_sweeps_;
}

DenseVector TwoGridPreconditioner::apply(const DenseVector& r) const {
  if (static_cast<int>(r.size()) != A_.n_rows())
    throw std::invalid_argument("TwoGridPreconditioner: size mismatch");
  DenseVector z(r.size(), 0.0);
  for (int s = 0; s < pre_sweeps_; ++s) smoother_.sweep(z, r);

  DenseVector d = r;
  DenseVector Az = spmv(A_, z);
  axpy(-1.0, Az, d);
  DenseVector dc = spmv_transpose(P_, d);
  Eigen::VectorXd yc = coarse_solver_.solve(to_eigen(dc));
  DenseVector corr = spmv(P_, from_eigen(yc));
  axpy(1.0, corr, z);

  for (int s = 0; s < post_sweeps_; ++s) smoother_.sweep(z, r);
  return z;
}

}  // namespace npsolve
