#pragma once

#include "pico/types.hpp"

#include <vector>

namespace pico {

// Periodic forward-difference gradient for anisotropic total variation.
// Gradient output stacks the horizontal differences in components [0, n) and
// the vertical differences in [n, 2n).
struct TvOps {
  Index n = 0;
  Shape shape;
  std::vector<Index> fwd_h, fwd_v;  // index of the periodic forward neighbor
  std::vector<Index> bwd_h, bwd_v;  // index of the periodic backward neighbor

  explicit TvOps(Shape s);

  CVec grad(const CVec& x) const;
  CVec div_adj(const CVec& q) const;  // adjoint of grad

  // Transposed-batch versions: rows are batch entries, columns are voxels /
  // gradient components, so every per-component operation is contiguous.
  CMat grad_t(const CMat& xt) const;     // (B x n) -> (B x 2n)
  CMat div_adj_t(const CMat& qt) const;  // (B x 2n) -> (B x n)

  // Sum of complex moduli of all forward differences.
  double tv_value(const CVec& x) const;
};

}  // namespace pico
