#include "npsolve/grf.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "npsolve/rng.hpp"

namespace npsolve {

void GrfSpec::validate() const {
  if (!(length_scale > 0.0))
    throw std::invalid_argument("GrfSpec: length_scale must be positive");
  if (variance < 0.0)
    throw std::invalid_argument("GrfSpec: variance must be nonnegative");
}

namespace {

// FFTW's planner is not thread-safe; execution on distinct plans is.
std::mutex g_planner_mutex;

// In-place unnormalized forward DFT of length m (power of two here).
void fft_inplace(std::vector<std::complex<double>>& data) {
  int m = static_cast<int>(data.size());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(g_planner_mutex);
    plan = fftw_plan_dft_1d(
        m, reinterpret_cast<fftw_complex*>(data.data()),
        reinterpret_cast<fftw_complex*>(data.data()), FFTW_FORWARD,
        FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(g_planner_mutex);
    fftw_destroy_plan(plan);
  }
}

int next_pow2(int n) {
  int m = 1;
  while (m < n) m *= 2;
  return m;
}

// Circulant eigenvalues for the wrapped 1D kernel f(d) = exp(-d^2/(2 ls^2))
// on lags 0..m-1 with spacing h. Small negative values are truncation
// artifacts of the embedding and are clipped to zero.
std::vector<double> circulant_eigenvalues(int m, double h, double ls) {
  std::vector<std::complex<double>> row(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    double d = static_cast<double>(std::min(k, m - k)) * h;
    row[k] = std::exp(-d * d / (2.0 * ls * ls));
  }
  fft_inplace(row);
  std::vector<double> lam(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) lam[k] = std::max(0.0, row[k].real());
  return lam;
}

}  // namespace

DenseVector sample_grf(const GridSpec& grid, const GrfSpec& spec) {
  grid.validate();
  spec.validate();
  int n = grid.num_nodes();
  if (spec.variance == 0.0) return DenseVector(static_cast<std::size_t>(n), 0.0);
  double sigma = std::sqrt(spec.variance);
  Rng rng(spec.seed);

  if (grid.dims == 1) {
    int nx = grid.sizes[0];
    int m = next_pow2(2 * nx);
    std::vector<double> lam =
        circulant_eigenvalues(m, grid.spacing, spec.length_scale);
    // y = Re(FFT(sqrt(lam/m) .* xi)) has exactly the embedded covariance for
    // complex standard normal xi.
    std::vector<std::complex<double>> work(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
      double amp = std::sqrt(lam[k] / m);
      double re = rng.normal();
      double im = rng.normal();
      work[k] = std::complex<double>(amp * re, amp * im);
    }
    fft_inplace(work);
    DenseVector out(static_cast<std::size_t>(nx));
    for (int i = 0; i < nx; ++i) out[i] = sigma * work[i].real();
    return out;
  }

  // 2D: the kernel is separable, so the embedded eigenvalue grid is the
  // outer product of the per-axis circulant eigenvalues.
  int nx = grid.sizes[0], ny = grid.sizes[1];
  int mx = next_pow2(2 * nx), my = next_pow2(2 * ny);
  std::vector<double> lx =
      circulant_eigenvalues(mx, grid.spacing, spec.length_scale);
  std::vector<double> ly =
      circulant_eigenvalues(my, grid.spacing, spec.length_scale);

  std::vector<std::complex<double>> work(
      static_cast<std::size_t>(mx) * static_cast<std::size_t>(my));
  double inv_m = 1.0 / (static_cast<double>(mx) * static_cast<double>(my));
  for (int ky = 0; ky < my; ++ky)
    for (int kx = 0; kx < mx; ++kx) {
      double amp = std::sqrt(lx[kx] * ly[ky] * inv_m);
      double re = rng.normal();
      double im = rng.normal();
      work[static_cast<std::size_t>(ky) * mx + kx] =
          std::complex<double>(amp * re, amp * im);
    }
  // Row-column 2D FFT.
  std::vector<std::complex<double>> line(static_cast<std::size_t>(mx));
  for (int ky = 0; ky < my; ++ky) {
    std::copy_n(work.begin() + static_cast<std::size_t>(ky) * mx, mx,
                line.begin());
    fft_inplace(line);
    std::copy_n(line.begin(), mx, work.begin() + static_cast<std::size_t>(ky) * mx);
  }
  std::vector<std::complex<double>> col(static_cast<std::size_t>(my));
  for (int kx = 0; kx < mx; ++kx) {
    for (int ky = 0; ky < my; ++ky)
      col[ky] = work[static_cast<std::size_t>(ky) * mx + kx];
    fft_inplace(col);
    for (int ky = 0; ky < my; ++ky)
      work[static_cast<std::size_t>(ky) * mx + kx] = col[ky];
  }

  DenseVector out(static_cast<std::size_t>(n));
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x)
      out[static_cast<std::size_t>(y) * nx + x] =
          sigma * work[static_cast<std::size_t>(y) * mx + x].real();
  return out;
}

}  // namespace npsolve
