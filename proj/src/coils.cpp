#include "pico/coils.hpp"

#include <cmath>

namespace pico {

RVec CoilSensitivities::rss() const {
  if (maps.empty()) return RVec();
  RVec acc = RVec::Zero(maps.front().data.size());
  for (const ComplexImage& m : maps) acc += m.data.cwiseAbs2();
  return acc.cwiseSqrt();
}

CoilSensitivities synth_coils(Shape shape, Index n_coils, double profile_width,
                              double phase_ramp) {
  if (n_coils < 1) throw ShapeMismatch("synth_coils requires n_coils >= 1");
  if (!(profile_width > 0.0)) throw ShapeMismatch("profile_width must be positive");

  constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
  const double inv_two_w2 = std::isinf(profile_width)
                                ? 0.0
                                : 1.0 / (2.0 * profile_width * profile_width);
  const double ramp = std::isinf(profile_width) ? 0.0 : phase_ramp / profile_width;

  CoilSensitivities coils;
  coils.maps.reserve(static_cast<std::size_t>(n_coils));
  for (Index c = 0; c < n_coils; ++c) {
    const double theta = kTwoPi * static_cast<double>(c) / static_cast<double>(n_coils);
    const double ux = std::cos(theta);
    const double uy = std::sin(theta);
    ComplexImage map = ComplexImage::zero(shape);
    for (Index col = 0; col < shape.cols; ++col) {
      const double x =
          static_cast<double>(2 * col + 1 - shape.cols) / static_cast<double>(shape.cols);
      for (Index row = 0; row < shape.rows; ++row) {
        const double y = static_cast<double>(shape.rows - 1 - 2 * row) /
                         static_cast<double>(shape.rows);
        const double dx = x - ux;
        const double dy = y - uy;
        const double mag = std::exp(-(dx * dx + dy * dy) * inv_two_w2);
        const double phase = ramp * (x * ux + y * uy);
        map(row, col) = std::polar(mag, phase);
      }
    }
    coils.maps.push_back(std::move(map));
  }
  return coils;
}

}  // namespace pico
