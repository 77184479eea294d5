#pragma once

/**
 * @file pde.hpp
 * @brief Finite-difference assembly of the model problems on structured
 *        grids with homogeneous Dirichlet boundaries.
 *
 * Boundary unknowns are eliminated: matrices act on interior nodes only.
 * Interior node i along an axis of size n sits at coordinate (i+1)*spacing.
 * 2D nodes are ordered row-major, idx = y*nx + x; elasticity interleaves the
 * two displacement components, idx = 2*node + component.
 */

#include <limits>
#include <string>
#include <vector>

#include "npsolve/csr.hpp"

namespace npsolve {

struct GridSpec {
  int dims = 1;               // 1 or 2
  std::vector<int> sizes;     // interior points per axis, each >= 2
  double spacing = 0.0;       // > 0

  int num_nodes() const {
    int n = 1;
    for (int s : sizes) n *= s;
    return n;
  }
  void validate() const;
};

enum class PdeKind { Poisson1D, Poisson2D, Diffusion2D, Elasticity2D };

struct PdeFamily {
  PdeKind kind = PdeKind::Poisson1D;

  // Diffusion2D: one backward-Euler step of the heat operator,
  // A = I/dt + L, with cell-face coefficients taken as harmonic means of the
  // node coefficient field D(x, y) = coeff * exp(contrast * sin(2 pi x) *
  // sin(2 pi y)). dt = +inf drops the mass term.
  double diffusion_coeff = 1.0;
  double diffusion_contrast = 0.0;
  double dt = 1.0;

  // Elasticity2D (plane strain): Lame parameters, mu > 0, lambda >= 0.
  double lame_lambda = 1.0;
  double lame_mu = 1.0;

  void validate() const;

  /// Unknowns per grid node (2 for elasticity, else 1).
  int dofs_per_node() const { return kind == PdeKind::Elasticity2D ? 2 : 1; }

  /// Total unknowns for a grid.
  int num_unknowns(const GridSpec& grid) const {
    return dofs_per_node() * grid.num_nodes();
  }
};

PdeKind pde_kind_from_string(const std::string& name);
std::string to_string(PdeKind kind);

/// Assembles the system matrix for a family on a grid. The result is always
/// symmetric positive definite.
CsrMatrix assemble(const PdeFamily& family, const GridSpec& grid);

}  // namespace npsolve
