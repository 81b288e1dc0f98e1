#include "pico/phantom.hpp"

#include <cmath>

namespace pico {

namespace {

struct Ellipse {
  double value, a, b, x0, y0, phi_deg;
};

// Modified Shepp-Logan intensities (improved-contrast variant).
constexpr Ellipse kEllipses[] = {
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
    {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
    {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
    {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
    {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
    {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
    {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
};

void require_size(Index rows, Index cols) {
  if (rows < 8 || cols < 8) throw ShapeMismatch("phantom requires rows, cols >= 8");
}

}  // namespace

ComplexImage shepp_logan(Index rows, Index cols) {
  require_size(rows, cols);
  ComplexImage img = ComplexImage::zero({rows, cols});
  constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
  for (Index c = 0; c < cols; ++c) {
    const double x = static_cast<double>(2 * c + 1 - cols) / static_cast<double>(cols);
    for (Index r = 0; r < rows; ++r) {
      const double y = static_cast<double>(rows - 1 - 2 * r) / static_cast<double>(rows);
      double v = 0.0;
      for (const Ellipse& e : kEllipses) {
        const double phi = e.phi_deg * kDegToRad;
        const double dx = x - e.x0;
        const double dy = y - e.y0;
        const double xr = dx * std::cos(phi) + dy * std::sin(phi);
        const double yr = -dx * std::sin(phi) + dy * std::cos(phi);
        if ((xr / e.a) * (xr / e.a) + (yr / e.b) * (yr / e.b) <= 1.0) v += e.value;
      }
      // The intensity table sums to zero in the darkest overlap regions;
      // rounding can leave -1e-17 there, which the nonnegativity contract
      // forbids.
      img(r, c) = std::max(v, 0.0);
    }
  }
  return img;
}

ComplexImage piecewise_phantom(Index rows, Index cols) {
  require_size(rows, cols);
  ComplexImage img = ComplexImage::zero({rows, cols});
  // Rectangles in grid fractions [r0, r1) x [c0, c1), additive values.
  struct Block {
    double r0, r1, c0, c1, value;
  };
  constexpr Block kBlocks[] = {
      {2.0 / 16, 14.0 / 16, 2.0 / 16, 14.0 / 16, 0.4},
      {3.0 / 16, 8.0 / 16, 3.0 / 16, 13.0 / 16, 0.6},
      {9.0 / 16, 13.0 / 16, 5.0 / 16, 11.0 / 16, 0.1},
  };
  for (const Block& b : kBlocks) {
    const Index r0 = static_cast<Index>(b.r0 * rows);
    const Index r1 = static_cast<Index>(b.r1 * rows);
    const Index c0 = static_cast<Index>(b.c0 * cols);
    const Index c1 = static_cast<Index>(b.c1 * cols);
    for (Index c = c0; c < c1; ++c)
      for (Index r = r0; r < r1; ++r) img(r, c) += b.value;
  }
  return img;
}

BoolVec support_mask(const ComplexImage& img, double threshold) {
  return img.data.array().abs() > threshold;
}

BoolVec erode_mask(const BoolVec& mask, Shape shape, int iterations) {
  if (mask.size() != shape.size())
    throw ShapeMismatch("mask length does not match shape");
  BoolVec cur = mask;
  for (int it = 0; it < iterations; ++it) {
    BoolVec next = cur;
    for (Index c = 0; c < shape.cols; ++c) {
      for (Index r = 0; r < shape.rows; ++r) {
        const Index k = c * shape.rows + r;
        if (!cur[k]) continue;
        const bool keep = r > 0 && r + 1 < shape.rows && c > 0 && c + 1 < shape.cols &&
                          cur[k - 1] && cur[k + 1] && cur[k - shape.rows] &&
                          cur[k + shape.rows];
        next[k] = keep;
      }
    }
    cur.swap(next);
  }
  return cur;
}

}  // namespace pico
