#include "npsolve/spectral.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "npsolve/dense.hpp"
#include "npsolve/rng.hpp"

namespace npsolve {

namespace {

constexpr int kOracleGuard = 1024;

// M A column by column through preconditioner applications.
Eigen::MatrixXd build_ma(const CsrMatrix& A, const Preconditioner& M) {
  int n = A.n_rows();
  Eigen::MatrixXd MA(n, n);
  DenseVector ej(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    ej[j] = 1.0;
    DenseVector col = M.apply(spmv(A, ej));
    for (int i = 0; i < n; ++i) MA(i, j) = col[i];
    ej[j] = 0.0;
  }
  return MA;
}

SpectrumReport dense_oracle(const CsrMatrix& A, const Preconditioner& M) {
  int n = A.n_rows();
  if (n > kOracleGuard)
    throw std::invalid_argument("estimate_spectrum: dense oracle limited to n <= 1024");
  Eigen::MatrixXd MA = build_ma(A, M);
  Eigen::EigenSolver<Eigen::MatrixXd> es(MA, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("estimate_spectrum: eigensolver failed");
  SpectrumReport rep;
  rep.size = n;
  rep.method = "dense";
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int i = 0; i < n; ++i) {
    double re = es.eigenvalues()[i].real();
    rep.max_imag = std::max(rep.max_imag, std::abs(es.eigenvalues()[i].imag()));
    lo = std::min(lo, re);
    hi = std::max(hi, re);
  }
  rep.lambda_min = lo;
  rep.lambda_max = hi;
  rep.kappa = hi / lo;
  return rep;
}

// Lanczos on M A, which is self-adjoint in the A-inner product when both A
// and M are SPD. Extremes come from the tridiagonal Rayleigh matrix.
SpectrumReport lanczos(const CsrMatrix& A, const Preconditioner& M) {
  if (!M.claims_spd())
    throw std::invalid_argument(
        "estimate_spectrum: Lanczos needs an SPD-claiming preconditioner; "
        "use the power-iteration method instead");
  int n = A.n_rows();
  int steps = std::min(n, 200);
  Rng rng(12345);
  DenseVector v(static_cast<std::size_t>(n));
  for (double& x : v) x = rng.normal();

  auto a_dot = [&](const DenseVector& a, const DenseVector& b) {
    return dot(a, spmv(A, b));
  };
  double nv = std::sqrt(a_dot(v, v));
  scale_inplace(v, 1.0 / nv);

  std::vector<double> alpha, beta;  // tridiagonal coefficients
  DenseVector v_prev(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j < steps; ++j) {
    DenseVector w = M.apply(spmv(A, v));
    double a = a_dot(w, v);
    alpha.push_back(a);
    axpy(-a, v, w);
    if (j > 0) axpy(-beta.back(), v_prev, w);
    // Plain three-term recurrence; extremes converge long before loss of
    // orthogonality matters at these sizes.
    double b = std::sqrt(std::max(0.0, a_dot(w, w)));
    if (b < 1e-12 * std::abs(a)) break;
    beta.push_back(b);
    v_prev = v;
    v = w;
    scale_inplace(v, 1.0 / b);
  }
  int k = static_cast<int>(alpha.size());
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    T(i, i) = alpha[i];
    if (i + 1 < k) {
      T(i, i + 1) = beta[i];
      T(i + 1, i) = beta[i];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  SpectrumReport rep;
  rep.size = n;
  rep.method = "lanczos";
  rep.lambda_min = es.eigenvalues().minCoeff();
  rep.lambda_max = es.eigenvalues().maxCoeff();
  rep.kappa = rep.lambda_max / rep.lambda_min;
  return rep;
}

SpectrumReport power_iteration(const CsrMatrix& A, const Preconditioner& M) {
  int n = A.n_rows();
  if (n > kOracleGuard)
    throw std::invalid_argument(
        "estimate_spectrum: power iteration uses a dense assist for "
        "lambda_min, limited to n <= 1024");
  Rng rng(54321);
  DenseVector v(static_cast<std::size_t>(n));
  for (double& x : v) x = rng.normal();
  scale_inplace(v, 1.0 / norm2(v));
  double lam = 0.0;
  for (int it = 0; it < 500; ++it) {
    DenseVector w = M.apply(spmv(A, v));
    double nw = norm2(w);
    if (nw == 0.0) throw std::runtime_error("power iteration: zero iterate");
    double lam_next = dot(v, w);
    scale_inplace(w, 1.0 / nw);
    v = w;
    if (it > 10 && std::abs(lam_next - lam) <= 1e-12 * std::abs(lam_next)) {
      lam = lam_next;
      break;
    }
    lam = lam_next;
  }
  // Smallest eigenvalue via inverse iteration on the densified operator.
  Eigen::MatrixXd MA = build_ma(A, M);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(MA);
  Eigen::VectorXd u = Eigen::VectorXd::Ones(n);
  u.normalize();
  double mu = 0.0;
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd w = lu.solve(u);
    double nw = w.norm();
    if (nw == 0.0) break;
    w /= nw;
    double mu_next = w.dot(MA * w);
    u = w;
    if (it > 10 && std::abs(mu_next - mu) <= 1e-12 * std::abs(mu_next)) {
      mu = mu_next;
      break;
    }
    mu = mu_next;
  }
  SpectrumReport rep;
  rep.size = n;
  rep.method = "power";
  rep.lambda_max = lam;
  rep.lambda_min = mu;
  rep.kappa = lam / mu;
  return rep;
}

}  // namespace

SpectrumReport estimate_spectrum(const CsrMatrix& A, const Preconditioner& M,
                                 SpectrumMethod method, bool treat_as_linear) {
  if (A.n_rows() != A.n_cols())
    throw std::invalid_argument("estimate_spectrum: matrix must be square");
  SpectrumReport rep;
  switch (method) {
    case SpectrumMethod::DenseOracle: rep = dense_oracle(A, M); break;
    case SpectrumMethod::Lanczos: rep = lanczos(A, M); break;
    case SpectrumMethod::PowerIteration: rep = power_iteration(A, M); break;
  }
  rep.linearized = !treat_as_linear;
  return rep;
}

ContractionReport contraction_factor(const CsrMatrix& A,
                                     const Preconditioner& M) {
  int n = A.n_rows();
  if (n > kOracleGuard)
    throw std::invalid_argument("contraction_factor: limited to n <= 1024");
  // Error propagator columns: e_j - M(A e_j).
  Eigen::MatrixXd E = -build_ma(A, M);
  for (int i = 0; i < n; ++i) E(i, i) += 1.0;

  ContractionReport rep;
  rep.size = n;
  Eigen::EigenSolver<Eigen::MatrixXd> es(E, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("contraction_factor: eigensolver failed");
  double rho = 0.0;
  for (int i = 0; i < n; ++i) rho = std::max(rho, std::abs(es.eigenvalues()[i]));
  rep.rho = rho;

  // ||E||_A = ||A^{1/2} E A^{-1/2}||_2 through the SPD square root of A.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> aes(dense_from_csr(A));
  if (aes.info() != Eigen::Success)
    throw std::runtime_error("contraction_factor: eigensolver failed on A");
  if (aes.eigenvalues().minCoeff() <= 0.0)
    throw std::runtime_error("contraction_factor: A is not SPD");
  Eigen::VectorXd sq = aes.eigenvalues().cwiseSqrt();
  Eigen::MatrixXd S = aes.eigenvectors() * sq.asDiagonal() *
                      aes.eigenvectors().transpose() * E *
                      aes.eigenvectors() * sq.cwiseInverse().asDiagonal() *
                      aes.eigenvectors().transpose();
  rep.energy_norm = S.jacobiSvd().singularValues()[0];
  return rep;
}

double approximation_quality(const CsrMatrix& A, const CsrMatrix& P,
                             const DenseVector& e) {
  if (P.n_rows() != A.n_rows())
    throw std::invalid_argument("approximation_quality: P rows mismatch");
  double en = energy_norm(A, e);
  if (en == 0.0)
    throw std::invalid_argument("approximation_quality: zero error vector");
  int m = P.n_cols();
  // Normal equations (P^T A P) z = P^T A e, solved exactly.
  Eigen::MatrixXd Ac(m, m);
  DenseVector ej(static_cast<std::size_t>(m), 0.0);
  for (int j = 0; j < m; ++j) {
    ej[j] = 1.0;
    DenseVector col = spmv_transpose(P, spmv(A, spmv(P, ej)));
    for (int i = 0; i < m; ++i) Ac(i, j) = col[i];
    ej[j] = 0.0;
  }
  DenseVector rhs = spmv_transpose(P, spmv(A, e));
  Eigen::VectorXd z = Ac.llt().solve(to_eigen(rhs));
  DenseVector diff = e;
  axpy(-1.0, spmv(P, from_eigen(z)), diff);
  return energy_norm(A, diff) / en;
}

}  // namespace npsolve
