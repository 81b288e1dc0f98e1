#pragma once

#include "pico/types.hpp"

#include <vector>

namespace pico {

struct CoilSensitivities {
  std::vector<ComplexImage> maps;

  Index n_coils() const { return static_cast<Index>(maps.size()); }
  Shape shape() const { return maps.empty() ? Shape{} : maps.front().shape; }

  // Root-sum-of-squares magnitude per voxel.
  RVec rss() const;
};

// Synthetic ring of receive coils: coil c is a complex Gaussian-profile lobe
// centered at angle 2*pi*c/n_coils on the field-of-view boundary, carrying a
// smooth linear phase ramp along its radial direction. profile_width is the
// Gaussian width in units of half the field of view; as width -> infinity the
// map tends to the uniform unit map (the phase ramp is scaled by 1/width).
CoilSensitivities synth_coils(Shape shape, Index n_coils, double profile_width,
                              double phase_ramp = 0.5);

}  // namespace pico
