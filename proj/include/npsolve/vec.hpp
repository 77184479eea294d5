#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace npsolve {

using DenseVector = std::vector<double>;

inline double dot(const DenseVector& a, const DenseVector& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const DenseVector& v) { return std::sqrt(dot(v, v)); }

/// y += alpha * x
inline void axpy(double alpha, const DenseVector& x, DenseVector& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale_inplace(DenseVector& v, double alpha) {
  for (double& x : v) x *= alpha;
}

inline bool all_finite(const DenseVector& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace npsolve
