#pragma once

#include "pico/types.hpp"

namespace pico {

// Lower-triangular L with L L^H = m. Throws NotPositiveDefinite when a pivot
// drops to or below 1e-14 times the largest diagonal entry.
CMat cholesky(const CMat& m);
inline CMat cholesky(const HermitianMatrix& m) { return cholesky(m.m); }

// Solve (L L^H) x = rhs given the Cholesky factor L.
CMat cholesky_solve(const CMat& L, const CMat& rhs);

struct EigResult {
  RVec values;   // ascending
  CMat vectors;  // unitary columns
};

// Hermitian eigendecomposition. Throws NoConvergence if the iteration fails.
EigResult hermitian_eig(const CMat& m);
inline EigResult hermitian_eig(const HermitianMatrix& m) {
  return hermitian_eig(m.m);
}

}  // namespace pico
