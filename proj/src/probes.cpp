#include "pico/probes.hpp"

#include <cmath>
#include <numbers>

namespace pico {

const char* probe_family_name(ProbeFamily family) {
  switch (family) {
    case ProbeFamily::RandomPhase: return "random-phase";
    case ProbeFamily::RealRademacher: return "rademacher";
    case ProbeFamily::ComplexGaussian: return "gaussian";
  }
  return "unknown";
}

CVec draw_probe_vec(ProbeFamily family, SeedSpec seed, Index n) {
  if (n < 1) throw ShapeMismatch("probe length must be at least 1");
  switch (family) {
    case ProbeFamily::RandomPhase: {
      const RVec u = draw_uniform(seed, n);
      CVec v(n);
      for (Index i = 0; i < n; ++i) {
        const double theta = 2.0 * std::numbers::pi * u[i];
        v[i] = Complex(std::cos(theta), std::sin(theta));
      }
      return v;
    }
    case ProbeFamily::RealRademacher: {
      const RVec u = draw_uniform(seed, n);
      CVec v(n);
      for (Index i = 0; i < n; ++i)
        v[i] = Complex(u[i] <= 0.5 ? -1.0 : 1.0, 0.0);
      return v;
    }
    case ProbeFamily::ComplexGaussian:
      return draw_complex_gaussian(seed, n);
  }
  throw Error("unknown probe family");
}

ComplexImage draw_probe(ProbeFamily family, SeedSpec seed, Index n) {
  return {draw_probe_vec(family, seed, n), Shape{n, 1}};
}

}  // namespace pico
