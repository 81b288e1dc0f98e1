#include "pico/operators.hpp"

#include "pico/rng.hpp"

#include <cmath>

namespace pico {

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

CMat unitary_dft(Index n) {
  CMat f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index j = 0; j < n; ++j)
    for (Index k = 0; k < n; ++k)
      f(k, j) = std::polar(scale, -kTwoPi * static_cast<double>(k) *
                                      static_cast<double>(j) / static_cast<double>(n));
  return f;
}

// exp(-2*pi*i*(kx*c/cols + ky*r/rows)) per (sample, voxel); corner-origin
// pixel coordinates so integer frequencies reproduce DFT rows exactly.
CMat ndft_matrix(const SamplingPattern& p) {
  const Index rows = p.grid.rows, cols = p.grid.cols;
  CMat e(p.coords.rows(), rows * cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) {
      const Index k = c * rows + r;
      for (Index s = 0; s < p.coords.rows(); ++s) {
        const double phase =
            -kTwoPi * (p.coords(s, 0) * static_cast<double>(c) / static_cast<double>(cols) +
                       p.coords(s, 1) * static_cast<double>(r) / static_cast<double>(rows));
        e(s, k) = std::polar(1.0, phase);
      }
    }
  }
  return e;
}

// In-place forward substitution with L across the coil dimension: every coil
// block is a full (n_samples x batch) slab, so the triangular solve runs as a
// handful of slab-sized vector operations.
void whiten_forward(const CMat& l, Index n_samples, CMat& y) {
  const Index nc = l.rows();
  for (Index i = 0; i < nc; ++i) {
    auto yi = y.middleRows(i * n_samples, n_samples);
    for (Index j = 0; j < i; ++j)
      yi.noalias() -= l(i, j) * y.middleRows(j * n_samples, n_samples);
    yi /= l(i, i);
  }
}

// Adjoint of whiten_forward: back substitution with L^H.
void whiten_adjoint(const CMat& l, Index n_samples, CMat& y) {
  const Index nc = l.rows();
  for (Index i = nc - 1; i >= 0; --i) {
    auto yi = y.middleRows(i * n_samples, n_samples);
    for (Index j = i + 1; j < nc; ++j)
      yi.noalias() -= std::conj(l(j, i)) * y.middleRows(j * n_samples, n_samples);
    yi /= std::conj(l(i, i));
  }
}

}  // namespace

EncodingOperator make_operator(CoilSensitivities coils, SamplingPattern pattern,
                               std::optional<NoiseModel> noise) {
  if (coils.n_coils() < 1) throw ShapeMismatch("operator needs at least one coil");
  if (!(coils.shape() == pattern.grid))
    throw ShapeMismatch("coil maps and sampling pattern disagree on grid shape");

  EncodingOperator op;
  op.shape = pattern.grid;
  op.n_coils = coils.n_coils();
  op.n_samples = pattern.n_samples();
  if (op.n_samples < 1) throw ShapeMismatch("sampling pattern is empty");

  if (noise) {
    if (noise->covariance.dim() != op.n_coils)
      throw ShapeMismatch("noise covariance dimension does not match coil count");
    op.whitener = cholesky(noise->covariance);
  }

  if (pattern.kind == PatternKind::Cartesian) {
    op.dft_rows = unitary_dft(op.shape.rows);
    op.dft_cols = unitary_dft(op.shape.cols);
    op.dft_rows_adj = op.dft_rows.adjoint();
    op.dft_cols_adj = op.dft_cols.adjoint();
    op.kept = pattern.kept_rows();
  } else {
    op.ndft = ndft_matrix(pattern);
    op.ndft_adj = op.ndft.adjoint();
  }

  op.coils = std::move(coils);
  op.pattern = std::move(pattern);
  if (op.image_dim() <= 1024)
    op.normal = adjoint_batch(
        op, forward_batch(op, CMat::Identity(op.image_dim(), op.image_dim())));
  return op;
}

CMat forward_batch(const EncodingOperator& op, const CMat& images) {
  if (images.rows() != op.image_dim())
    throw ShapeMismatch("image batch rows do not match operator grid");
  const Index rows = op.shape.rows, cols = op.shape.cols;
  const Index batch = images.cols();
  CMat out(op.kspace_dim(), batch);

  for (Index c = 0; c < op.n_coils; ++c) {
    const CVec& smap = op.coils.maps[static_cast<std::size_t>(c)].data;
    const CMat weighted = images.array().colwise() * smap.array();

    if (op.pattern.kind == PatternKind::Cartesian) {
      // 2D unitary DFT as two dense matrix products with a transpose pack in
      // between; the second factor leaves each sampled row contiguous.
      const Eigen::Map<const CMat> stacked(weighted.data(), rows, cols * batch);
      const CMat zrows = op.dft_rows * stacked;
      CMat zt(cols, rows * batch);
      for (Index b = 0; b < batch; ++b)
        zt.middleCols(b * rows, rows) = zrows.middleCols(b * cols, cols).transpose();
      const CMat full = op.dft_cols * zt;  // column b*rows+r = DFT row r of image b
      const Index nk = static_cast<Index>(op.kept.size());
      for (Index b = 0; b < batch; ++b)
        for (Index i = 0; i < nk; ++i)
          out.col(b).segment(c * op.n_samples + i * cols, cols) =
              full.col(b * rows + op.kept[static_cast<std::size_t>(i)]);
    } else {
      out.middleRows(c * op.n_samples, op.n_samples).noalias() = op.ndft * weighted;
    }
  }

  if (op.whitener) whiten_forward(*op.whitener, op.n_samples, out);
  if (op.norm_scale != 1.0) out /= op.norm_scale;
  return out;
}

CMat adjoint_batch(const EncodingOperator& op, const CMat& kspace) {
  if (kspace.rows() != op.kspace_dim())
    throw ShapeMismatch("k-space batch rows do not match operator sampling");
  const Index rows = op.shape.rows, cols = op.shape.cols;
  const Index batch = kspace.cols();

  CMat y = kspace;
  if (op.whitener) whiten_adjoint(*op.whitener, op.n_samples, y);

  CMat out = CMat::Zero(op.image_dim(), batch);
  for (Index c = 0; c < op.n_coils; ++c) {
    CMat imageside(op.image_dim(), batch);
    if (op.pattern.kind == PatternKind::Cartesian) {
      const Index nk = static_cast<Index>(op.kept.size());
      CMat full = CMat::Zero(cols, rows * batch);
      for (Index b = 0; b < batch; ++b)
        for (Index i = 0; i < nk; ++i)
          full.col(b * rows + op.kept[static_cast<std::size_t>(i)]) =
              y.col(b).segment(c * op.n_samples + i * cols, cols);
      const CMat zt = op.dft_cols_adj * full;
      CMat zrows(rows, cols * batch);
      for (Index b = 0; b < batch; ++b)
        zrows.middleCols(b * cols, cols) = zt.middleCols(b * rows, rows).transpose();
      const CMat stacked = op.dft_rows_adj * zrows;
      imageside = Eigen::Map<const CMat>(stacked.data(), op.image_dim(), batch);
    } else {
      imageside.noalias() = op.ndft_adj * y.middleRows(c * op.n_samples, op.n_samples);
    }
    const CVec& smap = op.coils.maps[static_cast<std::size_t>(c)].data;
    out.array() += imageside.array().colwise() * smap.conjugate().array();
  }

  if (op.norm_scale != 1.0) out /= op.norm_scale;
  return out;
}

KSpaceData forward(const EncodingOperator& op, const ComplexImage& x) {
  if (!(x.shape == op.shape)) throw ShapeMismatch("image shape does not match operator");
  const CMat y = forward_batch(op, x.data);
  return {y.col(0), op.n_samples, op.n_coils};
}

ComplexImage adjoint(const EncodingOperator& op, const KSpaceData& y) {
  if (y.n_samples != op.n_samples || y.n_coils != op.n_coils)
    throw ShapeMismatch("k-space dimensions do not match operator");
  const CMat x = adjoint_batch(op, y.data);
  return {x.col(0), op.shape};
}

double power_method_norm(const EncodingOperator& op, Index steps, double margin) {
  if (steps < 1) throw ShapeMismatch("power method needs at least one step");
  // Stream index 2^63 keeps the start vector out of every probe/replica
  // stream while remaining a pure function of nothing but the operator size.
  CVec x = draw_complex_gaussian(SeedSpec{0, std::uint64_t{1} << 63}, op.image_dim());
  x /= x.norm();
  double estimate = 0.0;
  const NormalOperator nop{op, 0.0};
  for (Index i = 0; i < steps; ++i) {
    const CVec y = apply_normal_batch(nop, x);
    const double ynorm = y.norm();
    if (ynorm == 0.0) return 0.0;  // A = 0: spectral norm is exactly zero
    // Rayleigh quotient of M at the half-step M^{1/2}x — tighter than |y|
    // for the same application count, still never above the top eigenvalue.
    estimate = ynorm * ynorm / x.dot(y).real();
    x = y / ynorm;
  }
  return margin * estimate;
}

EncodingOperator normalized(EncodingOperator op, Index steps, double margin) {
  op.norm_scale = 1.0;
  const double top = power_method_norm(op, steps, margin);
  op.norm_scale = std::sqrt(top);
  return op;
}

ComplexImage apply_normal(const NormalOperator& nop, const ComplexImage& x) {
  if (!(x.shape == nop.base.shape))
    throw ShapeMismatch("image shape does not match operator");
  return {apply_normal_batch(nop, x.data).col(0), nop.base.shape};
}

CMat apply_normal_batch(const NormalOperator& nop, const CMat& images) {
  CMat out;
  if (nop.base.normal.size() > 0) {
    if (images.rows() != nop.base.image_dim())
      throw ShapeMismatch("image batch rows do not match operator grid");
    out.noalias() = nop.base.normal * images;
    const double s2 = nop.base.norm_scale * nop.base.norm_scale;
    if (s2 != 1.0) out /= s2;
  } else {
    out = adjoint_batch(nop.base, forward_batch(nop.base, images));
  }
  if (nop.lambda != 0.0) out += nop.lambda * images;
  return out;
}

CMat materialize_dense(const EncodingOperator& op) {
  if (op.image_dim() > 1024) throw TooLarge("dense materialization capped at dim 1024");
  return forward_batch(op, CMat::Identity(op.image_dim(), op.image_dim()));
}

CMat materialize_dense(const NormalOperator& nop) {
  if (nop.base.image_dim() > 1024)
    throw TooLarge("dense materialization capped at dim 1024");
  return apply_normal_batch(
      nop, CMat::Identity(nop.base.image_dim(), nop.base.image_dim()));
}

}  // namespace pico
