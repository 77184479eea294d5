#pragma once

/// Zero-mean stationary Gaussian random fields on the interior grid nodes,
/// squared-exponential covariance C(d) = variance * exp(-d^2 / (2 ls^2)).
/// Sampling is exact (circulant embedding, spectral synthesis) and fully
/// deterministic for a given seed.

#include <cstdint>

#include "npsolve/pde.hpp"
#include "npsolve/vec.hpp"

namespace npsolve {

struct GrfSpec {
  double length_scale = 0.1;
  double variance = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One sample per grid node, row-major for 2D grids.
DenseVector sample_grf(const GridSpec& grid, const GrfSpec& spec);

}  // namespace npsolve
