#include "pico/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace pico {

std::vector<Index> SamplingPattern::kept_rows() const {
  std::vector<Index> rows;
  for (Index r = 0; r < row_mask.size(); ++r)
    if (row_mask[r]) rows.push_back(r);
  return rows;
}

Index SamplingPattern::n_samples() const {
  if (kind == PatternKind::Cartesian) {
    Index kept = 0;
    for (Index r = 0; r < row_mask.size(); ++r) kept += row_mask[r] ? 1 : 0;
    return kept * grid.cols;
  }
  return coords.rows();
}

SamplingPattern make_pattern_cartesian(Shape shape, Index R, Index calib) {
  if (shape.rows < 1 || shape.cols < 1) throw ShapeMismatch("empty grid");
  if (R < 1) throw ShapeMismatch("acceleration R must be >= 1");
  if (calib < 0 || calib > shape.rows)
    throw ShapeMismatch("calibration region exceeds grid");

  SamplingPattern p;
  p.kind = PatternKind::Cartesian;
  p.grid = shape;
  p.R = R;
  p.calib = calib;
  p.row_mask = BoolVec::Constant(shape.rows, false);
  for (Index r = 0; r < shape.rows; r += R) p.row_mask[r] = true;
  // Central frequencies live at both ends of the index range (DC at row 0).
  const Index head = (calib + 1) / 2;
  const Index tail = calib / 2;
  for (Index r = 0; r < head; ++r) p.row_mask[r] = true;
  for (Index r = shape.rows - tail; r < shape.rows; ++r) p.row_mask[r] = true;
  return p;
}

SamplingPattern make_pattern_radial(Shape shape, Index n_spokes,
                                    Index samples_per_spoke, Index R) {
  if (shape.rows < 1 || shape.cols < 1) throw ShapeMismatch("empty grid");
  if (n_spokes < 1 || samples_per_spoke < 2)
    throw ShapeMismatch("radial pattern needs >= 1 spoke and >= 2 samples per spoke");
  if (R < 1) throw ShapeMismatch("acceleration R must be >= 1");

  constexpr double kPi = 3.14159265358979323846;
  const double kmax = static_cast<double>(std::min(shape.rows, shape.cols)) / 2.0;

  std::vector<Index> kept;
  for (Index j = 0; j < n_spokes; j += R) kept.push_back(j);

  SamplingPattern p;
  p.kind = PatternKind::NonCartesian;
  p.grid = shape;
  p.R = R;
  p.coords.resize(static_cast<Index>(kept.size()) * samples_per_spoke, 2);
  p.interleave.reserve(p.coords.rows());
  Index s = 0;
  for (Index j : kept) {
    const double phi = kPi * static_cast<double>(j) / static_cast<double>(n_spokes);
    const double ux = std::cos(phi);
    const double uy = std::sin(phi);
    for (Index t = 0; t < samples_per_spoke; ++t) {
      const double radius =
          kmax * (2.0 * static_cast<double>(t) / static_cast<double>(samples_per_spoke - 1) - 1.0);
      p.coords(s, 0) = radius * ux;
      p.coords(s, 1) = radius * uy;
      p.interleave.push_back(j);
      ++s;
    }
  }
  return p;
}

}  // namespace pico
