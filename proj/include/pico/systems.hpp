#pragma once

#include "pico/recon.hpp"
#include "pico/types.hpp"

#include <cstdint>

namespace pico {

// Fixed small benchmark systems shared by tests, examples, and demo
// configurations. Each is fully deterministic: same coils, sampling, and
// solver settings on every call.

// 16x16, 4 coils (width 0.8), uniform Cartesian R=2 without calibration
// rows, unnormalized operator, unregularized CG reconstruction. The system
// with a closed-form SENSE variance map.
ReconSpec cartesian16();

// 16x16, 4 coils (width 0.6), radial trajectory with 64 full spokes of 32
// samples keeping every R-th spoke, operator normalized to unit spectral
// norm, Tikhonov lambda = 0.1, CG budget 400 iterations at 1e-8.
ReconSpec radial16(Index R);

// 16x16, 4 coils (width 0.8), Cartesian R=2 with 4 calibration rows,
// normalized operator, anisotropic-TV FISTA (lambda_tv = 1e-2, 60 outer
// iterations, 20 prox iterations).
ReconSpec cs16();

// Piecewise-constant phantom k-space for a spec's operator: forward of the
// phantom plus complex Gaussian noise of standard deviation noise_sigma
// (per real/imaginary component pair scaling as in the estimators), drawn
// from the given seed. noise_sigma = 0 gives clean data.
KSpaceData phantom_kspace(const ReconSpec& spec, double noise_sigma,
                          std::uint64_t seed);

}  // namespace pico
