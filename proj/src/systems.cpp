#include "pico/systems.hpp"

#include "pico/coils.hpp"
#include "pico/operators.hpp"
#include "pico/phantom.hpp"
#include "pico/rng.hpp"
#include "pico/sampling.hpp"

namespace pico {

ReconSpec cartesian16() {
  const Shape shape{16, 16};
  auto op = make_operator(synth_coils(shape, 4, 0.8),
                          make_pattern_cartesian(shape, 2, 0));
  return ReconSpec::linear(std::move(op), 0.0);
}

ReconSpec radial16(Index R) {
  const Shape shape{16, 16};
  auto op = normalized(make_operator(synth_coils(shape, 4, 0.6),
                                     make_pattern_radial(shape, 64, 32, R)),
                       60, 1.05);
  return ReconSpec::linear(std::move(op), 0.1, 400, 1e-8);
}

ReconSpec cs16() {
  const Shape shape{16, 16};
  auto op = normalized(make_operator(synth_coils(shape, 4, 0.8),
                                     make_pattern_cartesian(shape, 2, 4)),
                       60, 1.05);
  return ReconSpec::fista_tv(std::move(op), 1e-2, 60, 0.99, 20);
}

KSpaceData phantom_kspace(const ReconSpec& spec, double noise_sigma,
                          std::uint64_t seed) {
  const auto x = piecewise_phantom(spec.op.shape.rows, spec.op.shape.cols);
  KSpaceData b = forward(spec.op, x);
  if (noise_sigma > 0.0)
    b.data += noise_sigma *
              draw_complex_gaussian(SeedSpec{seed, 0}, spec.op.kspace_dim());
  return b;
}

}  // namespace pico
