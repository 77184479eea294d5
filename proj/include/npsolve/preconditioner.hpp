#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>

#include "npsolve/csr.hpp"
#include "npsolve/vec.hpp"

namespace npsolve {

/// Applies z = M r for some approximation M of A^{-1}. Implementations that
/// are symmetric positive definite as operators advertise it via claims_spd,
/// which CG checks (warning only). Implementations whose application is not
/// a fixed linear map return false from is_linear; solvers then treat an
/// exhausted Krylov subspace as a cue to re-linearize about the current
/// iterate instead of as a hard breakdown.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual DenseVector apply(const DenseVector& r) const = 0;
  virtual bool claims_spd() const { return false; }
  virtual bool is_linear() const { return true; }
  virtual std::string name() const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
 public:
  DenseVector apply(const DenseVector& r) const override { return r; }
  bool claims_spd() const override { return true; }
  std::string name() const override { return "identity"; }
};

/// z = 0 for every r. Useful as a degenerate reference in analysis.
class ZeroPreconditioner final : public Preconditioner {
 public:
  explicit ZeroPreconditioner(int n) : n_(n) {}
  DenseVector apply(const DenseVector& r) const override {
    if (static_cast<int>(r.size()) != n_)
      throw std::invalid_argument("ZeroPreconditioner: size mismatch");
    return DenseVector(r.size(), 0.0);
  }
  std::string name() const override { return "zero"; }

 private:
  int n_;
};

/// Exact inverse via a dense LU factorization. Analysis and testing only,
/// guarded against large matrices.
class DenseInversePreconditioner final : public Preconditioner {
 public:
  explicit DenseInversePreconditioner(const CsrMatrix& A);
  DenseVector apply(const DenseVector& r) const override;
  bool claims_spd() const override { return true; }
  std::string name() const override { return "exactinv"; }

 private:
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  int n_;
};

}  // namespace npsolve
