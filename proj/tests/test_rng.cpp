#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "polariton/rng.hpp"

using namespace polariton;
using namespace polariton::rng;

namespace {

// Known-answer vectors of the Random123 reference implementation.
TEST(Philox, ZeroCounterAndKey) {
    const Counter out = philox4x32({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(out, (Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, AllOnes) {
    const Counter out = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(out, (Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, DigitsOfPi) {
    const Counter out = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(out, (Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, EvaluatesAtCompileTime) {
    constexpr Counter out = philox4x32({0, 0, 0, 0}, {0, 0});
    static_assert(out[0] == 0x6627e8d5u);
    SUCCEED();
}

TEST(Philox, SeedSplitsIntoKeyWords) {
    EXPECT_EQ(key_from_seed(0x0123456789abcdefULL), (Key{0x89abcdefu, 0x01234567u}));
}

TEST(Philox, EngineWalksCounterBlocks) {
    PhiloxEngine eng({7, 9}, 1, 2, 3);
    for (std::uint32_t block = 0; block < 3; ++block) {
        const Counter expected = philox4x32({block, 1, 2, 3}, {7, 9});
        for (int w = 0; w < 4; ++w) EXPECT_EQ(eng(), expected[w]);
    }
}

TEST(GaussianField, SameArgumentsGiveIdenticalDraws) {
    const GaussianField a(42, 5);
    const GaussianField b(42, 5);
    std::vector<std::complex<double>> x(100), y(100);
    a.fill(17, x, 1.0);
    b.fill(17, y, 1.0);
    EXPECT_EQ(x, y);
    a.fill(18, y, 1.0);
    EXPECT_NE(x, y);
    GaussianField(42, 6).fill(17, y, 1.0);
    EXPECT_NE(x, y);
    GaussianField(43, 5).fill(17, y, 1.0);
    EXPECT_NE(x, y);
}

TEST(GaussianField, ScalesByPerPointSigma) {
    const GaussianField f(3, 0);
    std::vector<std::complex<double>> unit(8), scaled(8);
    std::vector<double> sigma = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0};
    f.fill(1, unit, 1.0);
    f.fill(1, scaled, sigma);
    for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_DOUBLE_EQ(scaled[i].real(), sigma[i] * unit[i].real());
        EXPECT_DOUBLE_EQ(scaled[i].imag(), sigma[i] * unit[i].imag());
    }
}

TEST(GaussianField, MomentsAndIsotropy) {
    // 1e6 complex draws: equal quadrature variances, no cross-correlation, E[dW^2] = 0.
    const std::size_t per_step = 1000;
    std::vector<std::complex<double>> buf(per_step);
    double sr = 0, si = 0, srr = 0, sii = 0, sri = 0, s4 = 0;
    std::size_t n = 0;
    for (std::uint64_t step = 0; step < 1000; ++step) {
        GaussianField(2024, static_cast<std::uint32_t>(step % 7)).fill(step, buf, 1.0);
        for (const auto& z : buf) {
            sr += z.real();
            si += z.imag();
            srr += z.real() * z.real();
            sii += z.imag() * z.imag();
            sri += z.real() * z.imag();
            s4 += z.real() * z.real() * z.real() * z.real();
            ++n;
        }
    }
    const double N = static_cast<double>(n);
    EXPECT_NEAR(sr / N, 0.0, 1e-2);
    EXPECT_NEAR(si / N, 0.0, 1e-2);
    EXPECT_NEAR(srr / N, 1.0, 1e-2);
    EXPECT_NEAR(sii / N, 1.0, 1e-2);
    EXPECT_NEAR(sri / N, 0.0, 1e-2);
    // E[dW^2] = E[x^2] - E[y^2] + 2i E[xy]
    EXPECT_NEAR((srr - sii) / N, 0.0, 1e-2);
    EXPECT_NEAR(s4 / N, 3.0, 3e-2);
}

}  // namespace
