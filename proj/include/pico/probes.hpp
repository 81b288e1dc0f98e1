#pragma once

#include "pico/rng.hpp"
#include "pico/types.hpp"

namespace pico {

// Zero-mean, unit-covariance probe distributions: E[v] = 0, E[v v^H] = I.
// They differ in fourth moment kappa = E[|v_k|^4]: RandomPhase and
// RealRademacher have kappa = 1, ComplexGaussian has kappa = 2.
enum class ProbeFamily { RandomPhase, RealRademacher, ComplexGaussian };

const char* probe_family_name(ProbeFamily family);

// Deterministic n-entry probe for the given seed. RandomPhase: exp(i*theta)
// with theta uniform; RealRademacher: +/-1 equiprobable; ComplexGaussian:
// CN(0,1) entries.
CVec draw_probe_vec(ProbeFamily family, SeedSpec seed, Index n);

// Same draw packaged as an n x 1 image.
ComplexImage draw_probe(ProbeFamily family, SeedSpec seed, Index n);

}  // namespace pico
