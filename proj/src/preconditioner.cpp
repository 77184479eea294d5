#include "npsolve/preconditioner.hpp"

#include "npsolve/dense.hpp"

namespace npsolve {

DenseInversePreconditioner::DenseInversePreconditioner(const CsrMatrix& A)
    : n_(A.n_rows()) {
  if (A.n_rows() != A.n_cols())
    throw std::invalid_argument("DenseInversePreconditioner: matrix not square");
  lu_ = Eigen::PartialPivLU<Eigen::MatrixXd>(dense_from_csr(A));
}

DenseVector DenseInversePreconditioner::apply(const DenseVector& r) const {
  if (static_cast<int>(r.size()) != n_)
    throw std::invalid_argument("DenseInversePreconditioner: size mismatch");
  Eigen::VectorXd z = lu_.solve(to_eigen(r));
  return from_eigen(z);
}

}  // namespace npsolve
