#pragma once

#include "pico/types.hpp"

#include <vector>

namespace pico {

enum class PatternKind { Cartesian, NonCartesian };

// Where in k-space the acquisition samples. Cartesian patterns keep whole
// phase-encode rows of the grid; non-Cartesian patterns are explicit (kx, ky)
// coordinates in cycles per field of view with an interleave index per sample.
struct SamplingPattern {
  PatternKind kind = PatternKind::Cartesian;
  Shape grid;

  // Cartesian
  BoolVec row_mask;       // length grid.rows
  Index R = 1;
  Index calib = 0;

  // NonCartesian
  RMat coords;                    // n_samples x 2: (kx, ky)
  std::vector<Index> interleave;  // per sample

  std::vector<Index> kept_rows() const;
  Index n_samples() const;
};

// Keep every R-th phase-encode row starting at row 0 (the DC row in the
// corner-origin frequency convention), plus `calib` fully sampled central
// frequency rows split across the low-frequency ends of the index range.
SamplingPattern make_pattern_cartesian(Shape shape, Index R, Index calib);

// Equiangular radial spokes through the k-space center: spoke j has angle
// pi*j/n_spokes and carries samples_per_spoke samples spanning signed radius
// [-kmax, kmax] with kmax = min(rows, cols)/2. Acceleration keeps every R-th
// spoke; the spoke index is recorded as the interleave index.
SamplingPattern make_pattern_radial(Shape shape, Index n_spokes,
                                    Index samples_per_spoke, Index R);

}  // namespace pico
