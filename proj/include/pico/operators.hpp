#pragma once

#include "pico/coils.hpp"
#include "pico/noise.hpp"
#include "pico/sampling.hpp"
#include "pico/types.hpp"

#include <optional>
#include <vector>

namespace pico {

// Multi-coil encoding operator A: coil weighting followed by (non-)uniform
// Fourier sampling, optional noise pre-whitening, and spectral normalization.
// Immutable after construction; applications are pure.
//
// Vectorized k-space layout matches KSpaceData: sample s of coil c sits at
// row c*n_samples + s. Cartesian samples are ordered (kept row ascending,
// column ascending); non-Cartesian samples follow the pattern's coordinate
// order.
struct EncodingOperator {
  CoilSensitivities coils;
  SamplingPattern pattern;
  std::optional<CMat> whitener;  // lower-triangular L with noise cov = L L^H
  double norm_scale = 1.0;

  Shape shape;
  Index n_samples = 0;
  Index n_coils = 0;

  // Cached transform factors.
  CMat dft_rows, dft_cols;        // unitary DFT matrices (Cartesian)
  CMat dft_rows_adj, dft_cols_adj;
  std::vector<Index> kept;        // kept row indices (Cartesian)
  CMat ndft, ndft_adj;            // phase matrices (non-Cartesian)

  // Dense A^H A at unit norm_scale, precomputed when image_dim() <= 1024 so
  // normal-equation applies cost one GEMM instead of a full forward/adjoint
  // composition; empty above that size. Holds whatever whitening the operator
  // carries; norm_scale is divided out at apply time.
  CMat normal;

  Index image_dim() const { return shape.size(); }
  Index kspace_dim() const { return n_samples * n_coils; }
};

EncodingOperator make_operator(CoilSensitivities coils, SamplingPattern pattern,
                               std::optional<NoiseModel> noise = std::nullopt);

// Batched applications: each column of the input is one image (column-major
// flattened) or one k-space vector.
CMat forward_batch(const EncodingOperator& op, const CMat& images);
CMat adjoint_batch(const EncodingOperator& op, const CMat& kspace);

KSpaceData forward(const EncodingOperator& op, const ComplexImage& x);
ComplexImage adjoint(const EncodingOperator& op, const KSpaceData& y);

// Margin-inflated largest-eigenvalue estimate of A^H A by power iteration
// from a fixed seeded start vector. Store sqrt of the result as norm_scale to
// give the normalized operator spectral norm just below 1.
double power_method_norm(const EncodingOperator& op, Index steps = 15,
                         double margin = 1.01);

// Copy of the operator rescaled so its normal operator has spectral norm just
// below 1 (norm_scale = sqrt(power_method_norm)).
EncodingOperator normalized(EncodingOperator op, Index steps = 15,
                            double margin = 1.01);

// Regularized normal operator M + lambda*I with M = A^H A.
struct NormalOperator {
  EncodingOperator base;
  double lambda = 0.0;
};

ComplexImage apply_normal(const NormalOperator& nop, const ComplexImage& x);
CMat apply_normal_batch(const NormalOperator& nop, const CMat& images);

// Dense matrices for oracle use only; capped at image dimension 1024.
CMat materialize_dense(const EncodingOperator& op);
CMat materialize_dense(const NormalOperator& nop);

}  // namespace pico
