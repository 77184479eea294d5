#include "npsolve/krylov.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace npsolve {

namespace {

void check_inputs(const CsrMatrix& A, const DenseVector& b,
                  const SolveConfig& cfg) {
  if (A.n_rows() != A.n_cols())
    throw std::invalid_argument("solver: matrix must be square");
  if (static_cast<int>(b.size()) != A.n_rows())
    throw std::invalid_argument("solver: rhs size mismatch");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("solver: tol must be > 0");
  if (cfg.max_iters < 1)
    throw std::invalid_argument("solver: max_iters must be >= 1");
  if (cfg.restart < 0)
    throw std::invalid_argument("solver: restart must be >= 0");
  if (cfg.record_stride < 1)
    throw std::invalid_argument("solver: record_stride must be >= 1");
}

void maybe_snapshot(SolveTrace& trace, const SolveConfig& cfg, int k,
                    const DenseVector& x, const DenseVector& r_true) {
  if (!cfg.record_trajectory) return;
  if (k % cfg.record_stride != 0) return;
  trace.snapshots.push_back({k, x, r_true});
}

/// Flexible restarted GMRES for preconditioners without a fixed linear
/// action: every application M(v_j) is kept as a direction z_j, the Arnoldi
/// recurrence holds for the computed A z_j by construction, and the least
/// squares therefore minimizes the true residual over span{z_0..z_j}. A
/// cycle can only improve on its starting iterate.
SolveTrace flexible_gmres(const CsrMatrix& A, const DenseVector& b,
                          const Preconditioner& M, const SolveConfig& cfg) {
  int n = A.n_rows();
  int cycle = cfg.restart > 0 ? cfg.restart : cfg.max_iters;

  SolveTrace trace;
  trace.x.assign(static_cast<std::size_t>(n), 0.0);
  double bnorm = norm2(b);
  trace.residual_norms.push_back(bnorm);
  // The least-squares objective here is the true residual itself.
  trace.precond_residual_norms.push_back(bnorm);
  maybe_snapshot(trace, cfg, 0, trace.x, b);
  if (bnorm == 0.0) {
    trace.converged = true;
    return trace;
  }

  int iters = 0;
  while (iters < cfg.max_iters && !trace.converged) {
    DenseVector r = b;
    DenseVector Ax = spmv(A, trace.x);
    axpy(-1.0, Ax, r);
    double beta = norm2(r);
    if (!std::isfinite(beta))
      throw std::runtime_error("GMRES diverged: residual is not finite");
    if (beta / bnorm <= cfg.tol) {
      trace.converged = true;
      break;
    }

    std::vector<DenseVector> V, Z;
    V.reserve(static_cast<std::size_t>(std::min(cycle, cfg.max_iters - iters)) + 1);
    Z.reserve(V.capacity() - 1);
    V.push_back(r);
    scale_inplace(V[0], 1.0 / beta);
    std::vector<std::vector<double>> R;
    std::vector<double> cs, sn;
    std::vector<double> g{beta};

    DenseVector x_cycle = trace.x;
    int j = 0;
    bool cycle_done = false;
    while (j < cycle && iters < cfg.max_iters && !cycle_done) {
      Z.push_back(M.apply(V[j]));
      DenseVector w = spmv(A, Z.back());
      ++iters;
      std::vector<double> h(static_cast<std::size_t>(j) + 2, 0.0);
      for (int i = 0; i <= j; ++i) {  // modified Gram-Schmidt
        h[i] = dot(w, V[i]);
        axpy(-h[i], V[i], w);
      }
      h[j + 1] = norm2(w);
      if (!std::isfinite(h[j + 1]))
        throw std::runtime_error("GMRES diverged: Arnoldi vector not finite");

      double col_scale = 0.0;
      for (int i = 0; i <= j + 1; ++i) col_scale = std::max(col_scale, std::abs(h[i]));
      bool happy = h[j + 1] <= 1e-14 * col_scale;
      if (!happy) {
        V.push_back(w);
        scale_inplace(V.back(), 1.0 / h[j + 1]);
      }

      for (int i = 0; i < j; ++i) {
        double t = cs[i] * h[i] + sn[i] * h[i + 1];
        h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
        h[i] = t;
      }
      double denom = std::hypot(h[j], h[j + 1]);
      if (denom <= 1e-300) {
        // The new direction carries no information. At the cycle start that
        // means the preconditioner killed the residual direction entirely;
        // later it just ends the cycle.
        if (j == 0)
          throw std::runtime_error(
              "GMRES breakdown: preconditioned direction is annihilated");
        break;
      }
      cs.push_back(h[j] / denom);
      sn.push_back(h[j + 1] / denom);
      h[j] = denom;
      h[j + 1] = 0.0;
      R.push_back(h);
      g.push_back(-sn[j] * g[j]);
      g[j] = cs[j] * g[j];
      trace.precond_residual_norms.push_back(std::abs(g[j + 1]));

      std::vector<double> y(static_cast<std::size_t>(j) + 1, 0.0);
      for (int i = j; i >= 0; --i) {
        double s_acc = g[i];
        for (int l = i + 1; l <= j; ++l) s_acc -= R[l][i] * y[l];
        y[i] = s_acc / R[i][i];
      }
      DenseVector xj = x_cycle;
      for (int l = 0; l <= j; ++l) axpy(y[l], Z[l], xj);

      DenseVector r_true = b;
      DenseVector Axj = spmv(A, xj);
      axpy(-1.0, Axj, r_true);
      double rn = norm2(r_true);
      if (!std::isfinite(rn))
        throw std::runtime_error("GMRES diverged: residual is not finite");
      trace.residual_norms.push_back(rn);
      trace.iterations = iters;
      trace.x = xj;
      maybe_snapshot(trace, cfg, iters, xj, r_true);

      if (rn / bnorm <= cfg.tol) {
        trace.converged = true;
        cycle_done = true;
      } else if (happy) {
        // Subspace exhausted below tol; restart re-linearizes about xj.
        cycle_done = true;
      }
      ++j;
    }
  }
  return trace;
}

}  // namespace

SolveTrace cg_solve(const CsrMatrix& A, const DenseVector& b,
                    const Preconditioner& M, const SolveConfig& cfg) {
  check_inputs(A, b, cfg);
  if (!M.claims_spd())
    std::fprintf(stderr,
                 "warning: CG with preconditioner '%s' which does not claim "
                 "to be SPD\n",
                 M.name().c_str());

  int n = A.n_rows();
  SolveTrace trace;
  trace.x.assign(static_cast<std::size_t>(n), 0.0);
  double bnorm = norm2(b);
  trace.residual_norms.push_back(bnorm);
  maybe_snapshot(trace, cfg, 0, trace.x, b);
  if (bnorm == 0.0 || bnorm <= cfg.tol * bnorm) {
    trace.converged = true;
    return trace;
  }

  DenseVector r = b;
  DenseVector z = M.apply(r);
  DenseVector p = z;
  double rz = dot(r, z);

  for (int k = 1; k <= cfg.max_iters; ++k) {
    DenseVector Ap = spmv(A, p);
    double pAp = dot(p, Ap);
    if (!(pAp > 0.0))
      throw std::runtime_error(
          "CG breakdown: search direction has nonpositive curvature, system "
          "or preconditioner is not SPD");
    double alpha = rz / pAp;
    axpy(alpha, p, trace.x);
    axpy(-alpha, Ap, r);

    // True residual for the trace and the convergence decision.
    DenseVector r_true = b;
    DenseVector Ax = spmv(A, trace.x);
    axpy(-1.0, Ax, r_true);
    double rn = norm2(r_true);
    if (!std::isfinite(rn))
      throw std::runtime_error("CG diverged: residual is not finite");
    trace.residual_norms.push_back(rn);
    trace.iterations = k;
    maybe_snapshot(trace, cfg, k, trace.x, r_true);
    if (rn / bnorm <= cfg.tol) {
      trace.converged = true;
      return trace;
    }

    z = M.apply(r);
    double rz_next = dot(r, z);
    double beta = rz_next / rz;
    rz = rz_next;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return trace;
}

SolveTrace gmres_solve(const CsrMatrix& A, const DenseVector& b,
                       const Preconditioner& M, const SolveConfig& cfg) {
  check_inputs(A, b, cfg);
  if (!M.is_linear()) return flexible_gmres(A, b, M, cfg);
  int n = A.n_rows();
  int cycle = cfg.restart > 0 ? cfg.restart : cfg.max_iters;

  SolveTrace trace;
  trace.x.assign(static_cast<std::size_t>(n), 0.0);
  double bnorm = norm2(b);
  trace.residual_norms.push_back(bnorm);
  {
    DenseVector z0 = M.apply(b);
    trace.precond_residual_norms.push_back(norm2(z0));
  }
  maybe_snapshot(trace, cfg, 0, trace.x, b);
  if (bnorm == 0.0 || bnorm <= cfg.tol * bnorm) {
    trace.converged = true;
    return trace;
  }

  int iters = 0;
  while (iters < cfg.max_iters && !trace.converged) {
    // Cycle start: preconditioned residual at the current iterate.
    DenseVector r = b;
    DenseVector Ax = spmv(A, trace.x);
    axpy(-1.0, Ax, r);
    DenseVector z = M.apply(r);
    double beta = norm2(z);
    if (!std::isfinite(beta))
      throw std::runtime_error("GMRES diverged: residual is not finite");
    if (beta == 0.0) {
      if (norm2(r) / bnorm <= cfg.tol) {
        trace.converged = true;
        break;
      }
      throw std::runtime_error(
          "GMRES breakdown: preconditioner maps a nonzero residual to zero");
    }

    std::vector<DenseVector> V;
    V.reserve(static_cast<std::size_t>(std::min(cycle, cfg.max_iters - iters)) + 1);
    V.push_back(z);
    scale_inplace(V[0], 1.0 / beta);
    // Columns of the Hessenberg matrix, rotated in place to upper triangular.
    std::vector<std::vector<double>> R;
    std::vector<double> cs, sn;
    std::vector<double> g{beta};

    DenseVector x_cycle = trace.x;
    int j = 0;
    bool cycle_done = false;
    while (j < cycle && iters < cfg.max_iters && !cycle_done) {
      DenseVector w = M.apply(spmv(A, V[j]));
      ++iters;
      std::vector<double> h(static_cast<std::size_t>(j) + 2, 0.0);
      for (int i = 0; i <= j; ++i) {  // modified Gram-Schmidt
        h[i] = dot(w, V[i]);
        axpy(-h[i], V[i], w);
      }
      h[j + 1] = norm2(w);
      if (!std::isfinite(h[j + 1]))
        throw std::runtime_error("GMRES diverged: Arnoldi vector not finite");

      double col_scale = 0.0;
      for (int i = 0; i <= j + 1; ++i) col_scale = std::max(col_scale, std::abs(h[i]));
      bool happy = h[j + 1] <= 1e-14 * col_scale;
      if (!happy) {
        V.push_back(w);
        scale_inplace(V.back(), 1.0 / h[j + 1]);
      }

      // Existing rotations, then a new one to zero the subdiagonal.
      for (int i = 0; i < j; ++i) {
        double t = cs[i] * h[i] + sn[i] * h[i + 1];
        h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
        h[i] = t;
      }
      double denom = std::hypot(h[j], h[j + 1]);
      if (denom <= 1e-300)
        throw std::runtime_error(
            "GMRES breakdown: Hessenberg column vanished (singular "
            "preconditioner?)");
      double c = h[j] / denom;
      double s = h[j + 1] / denom;
      cs.push_back(c);
      sn.push_back(s);
      h[j] = denom;
      h[j + 1] = 0.0;
      R.push_back(h);
      g.push_back(-s * g[j]);
      g[j] = c * g[j];
      trace.precond_residual_norms.push_back(std::abs(g[j + 1]));

      // Solve the least squares and form the iterate; the trace records the
      // true residual at every inner step.
      std::vector<double> y(static_cast<std::size_t>(j) + 1, 0.0);
      for (int i = j; i >= 0; --i) {
        double s_acc = g[i];
        for (int l = i + 1; l <= j; ++l) s_acc -= R[l][i] * y[l];
        y[i] = s_acc / R[i][i];
      }
      DenseVector xj = x_cycle;
      for (int l = 0; l <= j; ++l) axpy(y[l], V[l], xj);

      DenseVector r_true = b;
      DenseVector Axj = spmv(A, xj);
      axpy(-1.0, Axj, r_true);
      double rn = norm2(r_true);
      if (!std::isfinite(rn))
        throw std::runtime_error("GMRES diverged: residual is not finite");
      trace.residual_norms.push_back(rn);
      trace.iterations = iters;
      trace.x = xj;
      maybe_snapshot(trace, cfg, iters, xj, r_true);

      if (rn / bnorm <= cfg.tol) {
        trace.converged = true;
        cycle_done = true;
      } else if (happy) {
        // Happy breakdown: the Krylov space is invariant, so this iterate
        // solves the preconditioned system exactly and counts as converged
        // even when rounding keeps the recorded residual above tol.
        trace.converged = true;
        cycle_done = true;
      }
      ++j;
    }
  }
  return trace;
}

SolveTrace record_dataset(const CsrMatrix& A, const DenseVector& b,
                          const Preconditioner& M, SolveConfig cfg) {
  cfg.record_trajectory = true;
  SolveTrace trace = gmres_solve(A, b, M, cfg);
  // The reconstruction target is the final iterate; make sure it is present
  // even when the last iteration misses the stride.
  if (trace.snapshots.empty() ||
      trace.snapshots.back().k != trace.iterations) {
    DenseVector r = b;
    DenseVector Ax = spmv(A, trace.x);
    axpy(-1.0, Ax, r);
    trace.snapshots.push_back({trace.iterations, trace.x, r});
  }
  return trace;
}

}  // namespace npsolve
