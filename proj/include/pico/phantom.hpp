#pragma once

#include "pico/types.hpp"

namespace pico {

// Modified Shepp-Logan phantom on a rows x cols grid: real-valued,
// nonnegative, maximum intensity exactly 1.0. Pixel (r, c) samples the
// continuous phantom at the pixel center in normalized [-1,1]^2 coordinates.
ComplexImage shepp_logan(Index rows, Index cols);

// Piecewise-constant phantom (nested flat rectangles, values in {0, 0.4, 0.5,
// 1.0}) with sharp edges, suited to total-variation reconstruction tests.
ComplexImage piecewise_phantom(Index rows, Index cols);

// Voxels with |value| > threshold.
BoolVec support_mask(const ComplexImage& img, double threshold = 1e-3);

// Morphological erosion with the 4-neighborhood cross, repeated `iterations`
// times. Out-of-grid neighbors count as background (non-periodic).
BoolVec erode_mask(const BoolVec& mask, Shape shape, int iterations);

}  // namespace pico
