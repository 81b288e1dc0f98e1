#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pico {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using Index = Eigen::Index;
using BoolVec = Eigen::Array<bool, Eigen::Dynamic, 1>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// exit-code 3 family: numeric / domain failures
struct ShapeMismatch : Error { using Error::Error; };
struct NotPositiveDefinite : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct TooLarge : Error { using Error::Error; };
struct NonLinearSpec : Error { using Error::Error; };
struct TraceMismatch : Error { using Error::Error; };
struct SingularAliasSet : Error { using Error::Error; };
struct ZeroReference : Error { using Error::Error; };
struct NotReached : Error { using Error::Error; };
struct NotCertifiable : Error { using Error::Error; };

// exit-code 4 family: file / format failures
struct FormatError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// exit-code 2 family: configuration failures
struct ConfigError : Error { using Error::Error; };

struct Shape {
  Index rows = 0;
  Index cols = 0;
  Index size() const { return rows * cols; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

// Complex voxel grid, flattened column-major: entry (r, c) lives at c*rows + r.
struct ComplexImage {
  CVec data;
  Shape shape;

  ComplexImage() = default;
  ComplexImage(CVec d, Shape s) : data(std::move(d)), shape(s) {
    if (data.size() != shape.size())
      throw ShapeMismatch("image data length does not match shape");
  }
  static ComplexImage zero(Shape s) { return {CVec::Zero(s.size()), s}; }

  Complex& operator()(Index r, Index c) { return data[c * shape.rows + r]; }
  Complex operator()(Index r, Index c) const { return data[c * shape.rows + r]; }

  Eigen::Map<CMat> as_matrix() {
    return {data.data(), shape.rows, shape.cols};
  }
  Eigen::Map<const CMat> as_matrix() const {
    return {data.data(), shape.rows, shape.cols};
  }
};

// Multi-coil k-space samples. Coil-major layout: sample s of coil c lives at
// c*n_samples + s.
struct KSpaceData {
  CVec data;
  Index n_samples = 0;
  Index n_coils = 0;

  KSpaceData() = default;
  KSpaceData(CVec d, Index samples, Index coils)
      : data(std::move(d)), n_samples(samples), n_coils(coils) {
    if (data.size() != n_samples * n_coils)
      throw ShapeMismatch("k-space data length does not match sample/coil counts");
  }
  static KSpaceData zero(Index samples, Index coils) {
    return {CVec::Zero(samples * coils), samples, coils};
  }

  Eigen::Map<CMat> as_matrix() { return {data.data(), n_samples, n_coils}; }
  Eigen::Map<const CMat> as_matrix() const {
    return {data.data(), n_samples, n_coils};
  }
};

// Dense Hermitian matrix, validated on construction. Small-dimension use only
// (pre-whitening, oracles, spectral tests).
struct HermitianMatrix {
  CMat m;

  HermitianMatrix() = default;
  explicit HermitianMatrix(CMat in) : m(std::move(in)) {
    if (m.rows() != m.cols()) throw ShapeMismatch("Hermitian matrix must be square");
    if (m.rows() > 4096) throw TooLarge("Hermitian matrix capped at dim 4096");
    const double scale = m.norm();
    const double asym = (m - m.adjoint()).norm();
    if (asym > 1e-12 * std::max(scale, 1e-300))
      throw ShapeMismatch("matrix is not Hermitian within 1e-12 relative");
    // Symmetrize exactly so downstream factorizations see conj-symmetric entries.
    m = ((m + m.adjoint()) / 2.0).eval();
  }

  Index dim() const { return m.rows(); }
};

// Reproducibility contract: identical (master_seed, stream_index) yields an
// identical draw sequence regardless of evaluation order or worker count.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

}  // namespace pico
