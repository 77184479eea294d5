#pragma once

/**
 * @file spectral.hpp
 * @brief Desk-scale spectral diagnostics: extreme eigenvalues and condition
 *        numbers of preconditioned operators, stationary-cycle contraction
 *        factors, and the coarse-space approximation measure.
 *
 * The dense paths materialize M A (or I - M A) column by column through
 * preconditioner applications, so they work for any handle, including
 * nonlinear ones, where they are a linearization on the unit basis and are
 * flagged as such in the report.
 */

#include <string>

#include "npsolve/csr.hpp"
#include "npsolve/preconditioner.hpp"
#include "npsolve/two_grid.hpp"

namespace npsolve {

enum class SpectrumMethod { DenseOracle, Lanczos, PowerIteration };

struct SpectrumReport {
  int size = 0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double kappa = 0.0;
  std::string method;
  /// Set when the handle is not linear, in which case the numbers describe
  /// the operator built from its action on the unit basis.
  bool linearized = false;
  /// Largest |imag| across the computed eigenvalues (dense oracle only).
  double max_imag = 0.0;
};

struct ContractionReport {
  int size = 0;
  double rho = 0.0;          // spectral radius of I - M A
  double energy_norm = 0.0;  // ||I - M A||_A via the symmetrized form
};

/// Extreme eigenvalues of M A. The dense oracle requires n <= 1024; Lanczos
/// requires an SPD-claiming M (it runs in the A-inner product); power
/// iteration estimates lambda_max iteratively and lambda_min via a dense
/// inverse iteration assist.
SpectrumReport estimate_spectrum(const CsrMatrix& A, const Preconditioner& M,
                                 SpectrumMethod method,
                                 bool treat_as_linear = true);

/// Spectral radius and energy norm of the error propagator E = I - M A.
ContractionReport contraction_factor(const CsrMatrix& A,
                                     const Preconditioner& M);

/// Energy-norm distance from e to the interpolation range:
/// min_z ||e - P z||_A / ||e||_A, with the minimizer from the Galerkin
/// normal equations.
double approximation_quality(const CsrMatrix& A, const CsrMatrix& P,
                             const DenseVector& e);

}  // namespace npsolve
