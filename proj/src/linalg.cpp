#include "pico/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace pico {

CMat cholesky(const CMat& m) {
  if (m.rows() != m.cols()) throw ShapeMismatch("cholesky needs a square matrix");
  const Index n = m.rows();
  const double max_diag = n > 0 ? m.diagonal().real().maxCoeff() : 0.0;

  CMat L = CMat::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double d = std::real(m(j, j)) - L.row(j).head(j).squaredNorm();
    if (d <= 1e-14 * max_diag)
      throw NotPositiveDefinite("cholesky pivot at column " + std::to_string(j));
    const double ljj = std::sqrt(d);
    L(j, j) = ljj;
    if (j + 1 < n) {
      L.col(j).tail(n - j - 1) =
          (m.col(j).tail(n - j - 1) -
           L.bottomLeftCorner(n - j - 1, j) * L.row(j).head(j).adjoint()) /
          ljj;
    }
  }
  return L;
}

CMat cholesky_solve(const CMat& L, const CMat& rhs) {
  CMat y = L.triangularView<Eigen::Lower>().solve(rhs);
  return L.adjoint().triangularView<Eigen::Upper>().solve(y);
}

EigResult hermitian_eig(const CMat& m) {
  if (m.rows() != m.cols())
    throw ShapeMismatch("hermitian_eig needs a square matrix");
  Eigen::SelfAdjointEigenSolver<CMat> solver(m);
  if (solver.info() != Eigen::Success)
    throw NoConvergence("hermitian eigendecomposition did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace pico
