#include "pico/rng.hpp"

#include <cmath>

namespace pico {
namespace rng {
namespace {

constexpr std::uint64_t kMult0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMult1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                    std::uint64_t& lo) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

inline Complex gaussian_from_words(std::uint64_t w1, std::uint64_t w2) {
  const double u1 = to_unit(w1);
  const double u2 = to_unit(w2);
  const double r = std::sqrt(-std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace

std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> ctr,
                                        std::uint64_t key0, std::uint64_t key1) {
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMult0, ctr[0], hi0, lo0);
    mulhilo(kMult1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key0, lo1, hi0 ^ ctr[3] ^ key1, lo0};
    key0 += kWeyl0;
    key1 += kWeyl1;
  }
  return ctr;
}

std::uint64_t word_at(const SeedSpec& seed, std::uint64_t position) {
  const auto block =
      philox4x64({position / 4, 0, 0, 0}, seed.master_seed, seed.stream_index);
  return block[position % 4];
}

}  // namespace rng

RVec draw_uniform(const SeedSpec& seed, Index n) {
  RVec out(n);
  for (Index i = 0; i < n; i += 4) {
    const auto block = rng::philox4x64({static_cast<std::uint64_t>(i / 4), 0, 0, 0},
                                       seed.master_seed, seed.stream_index);
    for (Index j = 0; j < 4 && i + j < n; ++j) out[i + j] = rng::to_unit(block[j]);
  }
  return out;
}

CVec draw_complex_gaussian(const SeedSpec& seed, Index n) {
  CVec out(n);
  for (Index i = 0; i < n; i += 2) {
    const auto block = rng::philox4x64({static_cast<std::uint64_t>(i / 2), 0, 0, 0},
                                       seed.master_seed, seed.stream_index);
    out[i] = rng::gaussian_from_words(block[0], block[1]);
    if (i + 1 < n) out[i + 1] = rng::gaussian_from_words(block[2], block[3]);
  }
  return out;
}

}  // namespace pico
