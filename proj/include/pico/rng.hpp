#pragma once

#include "pico/types.hpp"

#include <array>
#include <cstdint>

namespace pico {

// Counter-based generator (Philox 4x64, 10 rounds). Stateless: every draw is a
// pure function of (master_seed, stream_index, position), so parallel and
// serial evaluation orders produce identical sequences.
namespace rng {

std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::uint64_t key0, std::uint64_t key1);

// Raw 64-bit word at `position` of the stream.
std::uint64_t word_at(const SeedSpec& seed, std::uint64_t position);

// Map a raw word to (0, 1]; never returns 0 so logs stay finite.
inline double to_unit(std::uint64_t w) {
  return static_cast<double>((w >> 11) + 1) * 0x1.0p-53;
}

}  // namespace rng

// n uniforms in (0, 1], draws 0..n-1 of the stream.
RVec draw_uniform(const SeedSpec& seed, Index n);

// n i.i.d. CN(0,1) entries: real and imaginary parts each N(0, 1/2).
// Draw i consumes stream words 2i and 2i+1.
CVec draw_complex_gaussian(const SeedSpec& seed, Index n);

}  // namespace pico
