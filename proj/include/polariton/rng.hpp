// Counter-based Philox4x32-10 generator and Gaussian draws. Every draw is a
// pure function of (key, counter), so noise is reproducible under any
// parallel schedule.
#pragma once

#include <boost/random/normal_distribution.hpp>

#include <array>
#include <complex>
#include <cstdint>
#include <span>

namespace polariton::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

namespace detail {

inline constexpr std::uint32_t philox_m0 = 0xD2511F53u;
inline constexpr std::uint32_t philox_m1 = 0xCD9E8D57u;
inline constexpr std::uint32_t philox_w0 = 0x9E3779B9u;
inline constexpr std::uint32_t philox_w1 = 0xBB67AE85u;

constexpr void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

constexpr Counter philox_round(const Counter& c, const Key& k) {
    std::uint32_t hi0 = 0, lo0 = 0, hi1 = 0, lo1 = 0;
    mulhilo(philox_m0, c[0], hi0, lo0);
    mulhilo(philox_m1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace detail

/// Philox4x32 with 10 rounds.
constexpr Counter philox4x32(Counter c, Key k) {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            k[0] += detail::philox_w0;
            k[1] += detail::philox_w1;
        }
        c = detail::philox_round(c, k);
    }
    return c;
}

constexpr Key key_from_seed(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

/// Uniform random bit generator over one Philox stream: words 1-3 of the
/// counter are fixed, word 0 counts blocks.
class PhiloxEngine {
public:
    using result_type = std::uint32_t;

    PhiloxEngine(const Key& key, std::uint32_t c1, std::uint32_t c2, std::uint32_t c3)
        : key_(key), counter_{0, c1, c2, c3} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return 0xffffffffu; }

    result_type operator()() {
        if (used_ == 4) {
            block_ = philox4x32(counter_, key_);
            ++counter_[0];
            used_ = 0;
        }
        return block_[used_++];
    }

private:
    Key key_;
    Counter counter_;
    Counter block_{};
    int used_ = 4;
};

/// Complex Gaussian fields for one realization. The stream for a given step
/// uses counter words (block, step low, step high, realization) and the seed
/// as key; normals come from the ziggurat method.
class GaussianField {
public:
    GaussianField(std::uint64_t seed, std::uint32_t realization)
        : key_(key_from_seed(seed)), realization_(realization) {}

    std::uint32_t realization() const { return realization_; }

    /// Fills out[i] with x + iy, x and y independent N(0, sigma[i]^2).
    void fill(std::uint64_t step, std::span<std::complex<double>> out, std::span<const double> sigma) const {
        auto eng = engine(step);
        boost::random::normal_distribution<double> normal;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double re = normal(eng);
            const double im = normal(eng);
            out[i] = {sigma[i] * re, sigma[i] * im};
        }
    }

    /// Same with a uniform standard deviation.
    void fill(std::uint64_t step, std::span<std::complex<double>> out, double sigma) const {
        auto eng = engine(step);
        boost::random::normal_distribution<double> normal;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double re = normal(eng);
            const double im = normal(eng);
            out[i] = {sigma * re, sigma * im};
        }
    }

private:
    PhiloxEngine engine(std::uint64_t step) const {
        return {key_, static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), realization_};
    }

    Key key_;
    std::uint32_t realization_;
};

}  // namespace polariton::rng
