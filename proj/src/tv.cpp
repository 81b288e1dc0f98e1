#include "pico/tv.hpp"

namespace pico {

TvOps::TvOps(Shape s) : n(s.size()), shape(s) {
  fwd_h.resize(static_cast<std::size_t>(n));
  fwd_v.resize(static_cast<std::size_t>(n));
  bwd_h.resize(static_cast<std::size_t>(n));
  bwd_v.resize(static_cast<std::size_t>(n));
  for (Index c = 0; c < s.cols; ++c) {
    const Index cf = (c + 1) % s.cols;
    const Index cb = (c + s.cols - 1) % s.cols;
    for (Index r = 0; r < s.rows; ++r) {
      const Index rf = (r + 1) % s.rows;
      const Index rb = (r + s.rows - 1) % s.rows;
      const Index k = c * s.rows + r;
      fwd_h[static_cast<std::size_t>(k)] = cf * s.rows + r;
      fwd_v[static_cast<std::size_t>(k)] = c * s.rows + rf;
      bwd_h[static_cast<std::size_t>(k)] = cb * s.rows + r;
      bwd_v[static_cast<std::size_t>(k)] = c * s.rows + rb;
    }
  }
}

CVec TvOps::grad(const CVec& x) const {
  CVec g(2 * n);
  for (Index k = 0; k < n; ++k) {
    g[k] = x[fwd_h[static_cast<std::size_t>(k)]] - x[k];
    g[n + k] = x[fwd_v[static_cast<std::size_t>(k)]] - x[k];
  }
  return g;
}

CVec TvOps::div_adj(const CVec& q) const {
  CVec out(n);
  for (Index k = 0; k < n; ++k) {
    // Adjoint of (P_fwd - I) is (P_bwd - I), applied per direction.
    out[k] = q[bwd_h[static_cast<std::size_t>(k)]] - q[k] +
             q[n + bwd_v[static_cast<std::size_t>(k)]] - q[n + k];
  }
  return out;
}

CMat TvOps::grad_t(const CMat& xt) const {
  CMat g(xt.rows(), 2 * n);
  for (Index k = 0; k < n; ++k) {
    g.col(k) = xt.col(fwd_h[static_cast<std::size_t>(k)]) - xt.col(k);
    g.col(n + k) = xt.col(fwd_v[static_cast<std::size_t>(k)]) - xt.col(k);
  }
  return g;
}

CMat TvOps::div_adj_t(const CMat& qt) const {
  CMat out(qt.rows(), n);
  for (Index k = 0; k < n; ++k) {
    out.col(k) = qt.col(bwd_h[static_cast<std::size_t>(k)]) - qt.col(k) +
                 qt.col(n + bwd_v[static_cast<std::size_t>(k)]) - qt.col(n + k);
  }
  return out;
}

double TvOps::tv_value(const CVec& x) const {
  double sum = 0.0;
  for (Index k = 0; k < n; ++k) {
    sum += std::abs(x[fwd_h[static_cast<std::size_t>(k)]] - x[k]);
    sum += std::abs(x[fwd_v[static_cast<std::size_t>(k)]] - x[k]);
  }
  return sum;
}

}  // namespace pico
