#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pico/rng.hpp"

#include <cmath>

using namespace pico;

// Published Random123 known-answer vectors for philox4x64-10, plus blocks
// cross-checked against NumPy's Philox bit generator (which emits the block
// for counter+1 relative to its reported counter state).
TEST_CASE("philox known-answer vectors") {
  using A4 = std::array<std::uint64_t, 4>;

  CHECK(rng::philox4x64({0, 0, 0, 0}, 0, 0) ==
        A4{0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL, 0xd7e772cee186176bULL,
           0x7e68b68aec7ba23bULL});
  CHECK(rng::philox4x64({0xffffffffffffffffULL, 0xffffffffffffffffULL,
                         0xffffffffffffffffULL, 0xffffffffffffffffULL},
                        0xffffffffffffffffULL, 0xffffffffffffffffULL) ==
        A4{0x87b092c3013fe90bULL, 0x438c3c67be8d0224ULL, 0x9cc7d7c69cd777b6ULL,
           0xa09caebf594f0ba0ULL});
  CHECK(rng::philox4x64({0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL,
                         0xa4093822299f31d0ULL, 0x082efa98ec4e6c89ULL},
                        0x452821e638d01377ULL, 0xbe5466cf34e90c6cULL) ==
        A4{0xa528f45403e61d95ULL, 0x38c72dbd566e9788ULL, 0xa5a1610e72fd18b5ULL,
           0x57bd43b5e52b7fe6ULL});

  CHECK(rng::philox4x64({1, 0, 0, 0}, 0, 0) ==
        A4{0x02f4ba6408e4d89bULL, 0x3dd62b0b9ca8c5b2ULL, 0x1c8667a55d902e79ULL,
           0x907d7a052fd5b4dcULL});
  CHECK(rng::philox4x64({2, 0, 0, 0}, 0, 0) ==
        A4{0x809bf322883987c3ULL, 0x471128b9e807f7ddULL, 0xf250ba0dbec065b7ULL,
           0xfc6ed66767a457bcULL});
  CHECK(rng::philox4x64({1, 0, 0, 0}, 1, 2) ==
        A4{0x4f2f4313b5536b09ULL, 0x5b617be3219ff32aULL, 0x097293476f9275cbULL,
           0xf63f3bf4962c3942ULL});
  CHECK(rng::philox4x64({43, 0, 0, 0}, 0xdeadbeefcafebabeULL,
                        0x0123456789abcdefULL) ==
        A4{0x080f4e154909acf9ULL, 0x461f61058ab605a8ULL, 0xd60a1b201a65ed3dULL,
           0xf7da9ed6460e50ffULL});
  CHECK(rng::philox4x64({0, 0, 0, 0}, 0xffffffffffffffffULL,
                        0xffffffffffffffffULL) ==
        A4{0x44b7493d1acfc229ULL, 0x6636af8e997921ddULL, 0x3f73e132b5b3780eULL,
           0x605644dde03b01b1ULL});
}

TEST_CASE("uniform draws live in (0,1] and are deterministic") {
  const SeedSpec seed{123, 7};
  const RVec u = draw_uniform(seed, 10001);
  CHECK(u.minCoeff() > 0.0);
  CHECK(u.maxCoeff() <= 1.0);
  const RVec again = draw_uniform(seed, 10001);
  CHECK(u == again);
  // A prefix of the stream is the same regardless of requested length.
  const RVec prefix = draw_uniform(seed, 37);
  CHECK(prefix == u.head(37));
}

TEST_CASE("complex gaussian moments") {
  const Index n = 1'000'000;
  const CVec z = draw_complex_gaussian(SeedSpec{2024, 0}, n);

  const RVec mod2 = z.cwiseAbs2();
  CHECK(mod2.mean() == doctest::Approx(1.0).epsilon(0.005));
  CHECK(mod2.cwiseProduct(mod2).mean() == doctest::Approx(2.0).epsilon(0.01));

  CHECK(std::abs(z.real().mean()) < 0.005);
  CHECK(std::abs(z.imag().mean()) < 0.005);
  // Components carry half the unit variance each.
  CHECK(z.real().squaredNorm() / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(z.imag().squaredNorm() / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("gaussian determinism and prefix stability") {
  const SeedSpec seed{99, 4};
  const CVec a = draw_complex_gaussian(seed, 513);
  const CVec b = draw_complex_gaussian(seed, 513);
  CHECK(a == b);
  const CVec prefix = draw_complex_gaussian(seed, 100);
  CHECK(prefix == a.head(100));
}

TEST_CASE("distinct streams decorrelate") {
  const Index n = 100'000;
  for (std::uint64_t s = 0; s < 3; ++s) {
    const CVec a = draw_complex_gaussian(SeedSpec{555, s}, n);
    const CVec b = draw_complex_gaussian(SeedSpec{555, s + 1}, n);
    const double corr =
        a.real().dot(b.real()) / std::sqrt(a.real().squaredNorm() * b.real().squaredNorm());
    CHECK(std::abs(corr) < 0.01);
  }
  // Different master seeds decorrelate the same stream index too.
  const CVec a = draw_complex_gaussian(SeedSpec{555, 0}, n);
  const CVec c = draw_complex_gaussian(SeedSpec{556, 0}, n);
  const double corr =
      a.real().dot(c.real()) / std::sqrt(a.real().squaredNorm() * c.real().squaredNorm());
  CHECK(std::abs(corr) < 0.01);
}
