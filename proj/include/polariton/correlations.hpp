// Streaming Wigner moments and the normally ordered density correlations
// built from them:
//
//   G1(x)     = <|psi(x)|^2>_W - 1/(2dx)
//   G2(x,x')  = <|psi(x)|^2 |psi(x')|^2>_W
//               - (1 + delta_xx')/(2dx) (<|psi(x)|^2>_W + <|psi(x')|^2>_W - 1/(2dx))
//   g2(x,x')  = G2 / (G1(x) G1(x'))
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "polariton/core.hpp"

namespace polariton {

struct GridMismatch : Error {
    GridMismatch(std::size_t expected, std::size_t got)
        : Error("correlation accumulator expects " + std::to_string(expected) + " points, got " +
                std::to_string(got)) {}
};

struct InsufficientSamples : Error {
    InsufficientSamples(std::uint64_t have, std::uint64_t need)
        : Error("need at least " + std::to_string(need) + " samples, have " + std::to_string(have)) {}
};

/// Neumaier compensated sum.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }

    void merge(const CompensatedSum& o) {
        add(o.sum);
        add(o.comp);
    }

    double value() const { return sum + comp; }

    bool operator==(const CompensatedSum&) const = default;
};

/// Sums of |psi|^2 and |psi(x)|^2 |psi(x')|^2 over samples, on every
/// decimation-th grid point. Pairs are stored as a dense upper triangle.
class CorrelationAccumulator {
public:
    CorrelationAccumulator() = default;
    CorrelationAccumulator(const Grid& grid, std::size_t decimation = 1)
        : grid_(grid), decimation_(decimation) {
        if (decimation == 0 || grid.size() % decimation != 0)
            throw ConfigError("correlations: decimation must divide the number of grid points");
        m_ = grid.size() / decimation;
        sum_n_.assign(m_, {});
        sum_nn_.assign(m_ * (m_ + 1) / 2, {});
        scratch_.resize(m_);
    }

    const Grid& grid() const { return grid_; }
    std::size_t decimation() const { return decimation_; }
    std::size_t size() const { return m_; }
    std::uint64_t count() const { return count_; }
    double dx() const { return grid_.dx(); }
    double x(std::size_t i) const { return grid_.x(i * decimation_); }

    std::size_t pair_index(std::size_t i, std::size_t j) const {
        if (i > j) std::swap(i, j);
        return i * m_ - i * (i - 1) / 2 + (j - i);
    }

    void accumulate(std::span<const cplx> psi) {
        if (psi.size() != grid_.size()) throw GridMismatch(grid_.size(), psi.size());
        for (std::size_t i = 0; i < m_; ++i) scratch_[i] = std::norm(psi[i * decimation_]);
        std::size_t p = 0;
        for (std::size_t i = 0; i < m_; ++i) {
            const double ni = scratch_[i];
            sum_n_[i].add(ni);
            for (std::size_t j = i; j < m_; ++j) sum_nn_[p++].add(ni * scratch_[j]);
        }
        ++count_;
    }

    void merge(const CorrelationAccumulator& o) {
        if (o.m_ != m_ || o.decimation_ != decimation_ || !(o.grid_ == grid_))
            throw GridMismatch(m_, o.m_);
        for (std::size_t i = 0; i < m_; ++i) sum_n_[i].merge(o.sum_n_[i]);
        for (std::size_t p = 0; p < sum_nn_.size(); ++p) sum_nn_[p].merge(o.sum_nn_[p]);
        count_ += o.count_;
    }

    void clear() {
        std::fill(sum_n_.begin(), sum_n_.end(), CompensatedSum{});
        std::fill(sum_nn_.begin(), sum_nn_.end(), CompensatedSum{});
        count_ = 0;
    }

    double sum_n(std::size_t i) const { return sum_n_[i].value(); }
    double sum_nn(std::size_t i, std::size_t j) const { return sum_nn_[pair_index(i, j)].value(); }

    /// <|psi|^2>_W per retained point.
    std::vector<double> mean_density() const {
        if (count_ < 1) throw InsufficientSamples(count_, 1);
        std::vector<double> m(m_);
        for (std::size_t i = 0; i < m_; ++i) m[i] = sum_n(i) / static_cast<double>(count_);
        return m;
    }

    bool operator==(const CorrelationAccumulator& o) const {
        return grid_ == o.grid_ && decimation_ == o.decimation_ && count_ == o.count_ &&
               sum_n_ == o.sum_n_ && sum_nn_ == o.sum_nn_;
    }

    void write(std::ostream& out) const {
        const std::uint64_t header[3] = {m_, decimation_, count_};
        out.write(reinterpret_cast<const char*>(header), sizeof header);
        out.write(reinterpret_cast<const char*>(sum_n_.data()),
                  static_cast<std::streamsize>(sum_n_.size() * sizeof(CompensatedSum)));
        out.write(reinterpret_cast<const char*>(sum_nn_.data()),
                  static_cast<std::streamsize>(sum_nn_.size() * sizeof(CompensatedSum)));
    }

    /// Reads state written by write() into an accumulator built for the same grid.
    void read(std::istream& in) {
        std::uint64_t header[3] = {};
        in.read(reinterpret_cast<char*>(header), sizeof header);
        if (!in || header[0] != m_ || header[1] != decimation_)
            throw Error("correlations: checkpoint does not match the accumulator layout");
        count_ = header[2];
        in.read(reinterpret_cast<char*>(sum_n_.data()),
                static_cast<std::streamsize>(sum_n_.size() * sizeof(CompensatedSum)));
        in.read(reinterpret_cast<char*>(sum_nn_.data()),
                static_cast<std::streamsize>(sum_nn_.size() * sizeof(CompensatedSum)));
        if (!in) throw Error("correlations: truncated checkpoint");
    }

private:
    Grid grid_;
    std::size_t decimation_ = 1;
    std::size_t m_ = 0;
    std::uint64_t count_ = 0;
    std::vector<CompensatedSum> sum_n_;
    std::vector<CompensatedSum> sum_nn_;
    std::vector<double> scratch_;
};

/// Symmetric m x m matrix stored row-major.
struct SymmetricMatrix {
    std::size_t m = 0;
    std::vector<double> data;

    SymmetricMatrix() = default;
    explicit SymmetricMatrix(std::size_t size, double fill = 0.0) : m(size), data(size * size, fill) {}
    double operator()(std::size_t i, std::size_t j) const { return data[i * m + j]; }
    void set(std::size_t i, std::size_t j, double v) {
        data[i * m + j] = v;
        data[j * m + i] = v;
    }
};

inline std::vector<double> g1(const CorrelationAccumulator& acc) {
    auto m = acc.mean_density();
    const double vac = 0.5 / acc.dx();
    for (auto& v : m) v -= vac;
    return m;
}

inline SymmetricMatrix normal_order_G2(const CorrelationAccumulator& acc) {
    if (acc.count() < 2) throw InsufficientSamples(acc.count(), 2);
    const auto mean = acc.mean_density();
    const double vac = 0.5 / acc.dx();
    const double c = static_cast<double>(acc.count());
    SymmetricMatrix G(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i)
        for (std::size_t j = i; j < acc.size(); ++j) {
            const double bose = i == j ? 2.0 : 1.0;
            G.set(i, j, acc.sum_nn(i, j) / c - vac * bose * (mean[i] + mean[j] - vac));
        }
    return G;
}

enum class G2Normalization {
    g1,       ///< G1(x) G1(x'), normally ordered
    density,  ///< <n(x)>_W <n(x')>_W
};

struct CorrelationOptions {
    double g1_floor = 1e-9;  ///< [1/um]
    G2Normalization normalization = G2Normalization::g1;
};

struct CorrelationMap {
    double x_min = 0.0;
    double dx = 0.0;  ///< spacing of the map points (grid dx times decimation)
    std::uint64_t n_samples = 0;
    std::vector<double> G1;
    SymmetricMatrix g2;  ///< NaN where masked

    std::size_t size() const { return G1.size(); }
    double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx; }
};

inline CorrelationMap g2_map(const CorrelationAccumulator& acc, const CorrelationOptions& opt = {}) {
    const auto G2 = normal_order_G2(acc);
    CorrelationMap map;
    map.x_min = acc.x(0);
    map.dx = acc.dx() * static_cast<double>(acc.decimation());
    map.n_samples = acc.count();
    map.G1 = g1(acc);
    const auto norm = opt.normalization == G2Normalization::g1 ? map.G1 : acc.mean_density();
    const std::size_t m = acc.size();
    map.g2 = SymmetricMatrix(m, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < m; ++i) {
        if (!(map.G1[i] > opt.g1_floor)) continue;
        for (std::size_t j = i; j < m; ++j) {
            if (!(map.G1[j] > opt.g1_floor)) continue;
            map.g2.set(i, j, G2(i, j) / (norm[i] * norm[j]));
        }
    }
    return map;
}

// ---------------------------------------------------------------------------
// Region statistics
// ---------------------------------------------------------------------------

/// Band around the line x' - x_H = slope (x_H - x) with x upstream of the
/// horizon and x' downstream.
struct MoustacheBand {
    double slope = 2.0;         ///< downstream distance per upstream distance
    double half_width = 4.0;    ///< [um], measured along x'
    double offset = 1.0;        ///< excluded distance from the horizon [um]
    double upstream_extent = 20.0;  ///< [um]
};

/// Strip |x - x_edge| <= half_width with x' beyond the horizon: the
/// horizontal/vertical half-line traces at the defect.
struct EdgeBand {
    double x_edge = 0.0;
    double half_width = 1.0;
    double offset = 5.0;    ///< start of the strip beyond the horizon [um]
    double extent = 60.0;   ///< strip length [um]
};

/// Near-diagonal strip |x - x'| <= half_width with both points in
/// [x_H - extent, x_H - offset].
struct DiagonalBand {
    double half_width = 1.0;
    double offset = 1.0;
    double extent = 35.0;
};

struct RegionGeometry {
    MoustacheBand moustache;
    EdgeBand edge;
    DiagonalBand diagonal;
};

struct RegionValues {
    double SW = 0.0;  ///< x, x' upstream
    double SE = 0.0;  ///< x downstream, x' upstream
    double NW = 0.0;  ///< x upstream, x' downstream
    double NE = 0.0;  ///< x, x' downstream
    double moustache = 0.0;
    double edge = 0.0;
    double diagonal_upstream = 0.0;  ///< near-diagonal strip upstream of the horizon
};

struct Estimate {
    double value = 0.0;
    double se = 0.0;
    double significance() const { return se > 0.0 ? value / se : 0.0; }
};

struct RegionStatistics {
    Estimate SW, SE, NW, NE, moustache, edge, diagonal_upstream;
    std::size_t resamples = 0;
};

namespace detail {

struct MeanOf {
    double sum = 0.0;
    std::size_t n = 0;
    void add(double v) {
        if (std::isfinite(v)) {
            sum += v;
            ++n;
        }
    }
    double value() const { return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN(); }
};

}  // namespace detail

/// Means of g2 - 1 over quadrants (split at horizon_x, diagonal excluded),
/// over the moustache band, the edge strip and the upstream diagonal strip.
inline RegionValues region_means(const CorrelationMap& map, double horizon_x, const RegionGeometry& geom = {}) {
    const auto& band = geom.moustache;
    const auto& edge = geom.edge;
    const auto& dg = geom.diagonal;
    detail::MeanOf sw, se, nw, ne, mous, edg, diag;
    const std::size_t m = map.size();
    auto in_diag_window = [&](double x) { return x >= horizon_x - dg.extent && x <= horizon_x - dg.offset; };
    for (std::size_t i = 0; i < m; ++i) {
        const double x = map.x(i);
        for (std::size_t j = 0; j < m; ++j) {
            const double xp = map.x(j);
            const double v = map.g2(i, j) - 1.0;
            if (std::abs(x - xp) <= dg.half_width && in_diag_window(x) && in_diag_window(xp)) diag.add(v);
            if (i == j) continue;
            const bool up = x < horizon_x;
            const bool upp = xp < horizon_x;
            if (up && upp) sw.add(v);
            else if (up && !upp) nw.add(v);
            else if (!up && upp) se.add(v);
            else ne.add(v);
            // Band and strip are evaluated on the upstream-downstream side
            // (x upstream, x' downstream); the map is symmetric.
            if (up && !upp) {
                const double du = horizon_x - x;
                const double dd = xp - horizon_x;
                if (du >= band.offset && du <= band.upstream_extent && dd >= band.offset &&
                    std::abs(dd - band.slope * du) <= band.half_width)
                    mous.add(v);
            }
            if (std::abs(x - edge.x_edge) <= edge.half_width && xp >= horizon_x + edge.offset &&
                xp <= horizon_x + edge.offset + edge.extent)
                edg.add(v);
        }
    }
    return {sw.value(), se.value(), nw.value(), ne.value(), mous.value(), edg.value(), diag.value()};
}

/// Point estimates from the pooled blocks, standard errors from a bootstrap
/// over blocks. Deterministic for a given seed.
inline RegionStatistics region_statistics(std::span<const CorrelationAccumulator> blocks, double horizon_x,
                                          const RegionGeometry& geom = {}, const CorrelationOptions& opt = {},
                                          std::size_t resamples = 200,
                                          std::uint64_t seed = 0x5eedULL) {
    if (blocks.empty()) throw InsufficientSamples(0, 2);
    CorrelationAccumulator pooled = blocks.front();
    for (std::size_t b = 1; b < blocks.size(); ++b) pooled.merge(blocks[b]);
    const auto point = region_means(g2_map(pooled, opt), horizon_x, geom);

    std::vector<std::size_t> populated;
    for (std::size_t b = 0; b < blocks.size(); ++b)
        if (blocks[b].count() > 0) populated.push_back(b);

    RegionStatistics out;
    auto set_values = [&](auto member) { return Estimate{point.*member, 0.0}; };
    out.SW = set_values(&RegionValues::SW);
    out.SE = set_values(&RegionValues::SE);
    out.NW = set_values(&RegionValues::NW);
    out.NE = set_values(&RegionValues::NE);
    out.moustache = set_values(&RegionValues::moustache);
    out.edge = set_values(&RegionValues::edge);
    out.diagonal_upstream = set_values(&RegionValues::diagonal_upstream);
    if (populated.size() < 2 || resamples == 0) return out;

    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<std::size_t> pick(0, populated.size() - 1);
    std::vector<RegionValues> draws;
    draws.reserve(resamples);
    for (std::size_t r = 0; r < resamples; ++r) {
        CorrelationAccumulator acc(pooled.grid(), pooled.decimation());
        for (std::size_t k = 0; k < populated.size(); ++k) acc.merge(blocks[populated[pick(gen)]]);
        if (acc.count() < 2) continue;
        draws.push_back(region_means(g2_map(acc, opt), horizon_x, geom));
    }
    auto stddev = [&](double RegionValues::*member) {
        double mean = 0.0;
        std::size_t n = 0;
        for (const auto& d : draws)
            if (std::isfinite(d.*member)) {
                mean += d.*member;
                ++n;
            }
        if (n < 2) return std::numeric_limits<double>::quiet_NaN();
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (const auto& d : draws)
            if (std::isfinite(d.*member)) ss += (d.*member - mean) * (d.*member - mean);
        return std::sqrt(ss / static_cast<double>(n - 1));
    };
    out.SW.se = stddev(&RegionValues::SW);
    out.SE.se = stddev(&RegionValues::SE);
    out.NW.se = stddev(&RegionValues::NW);
    out.NE.se = stddev(&RegionValues::NE);
    out.moustache.se = stddev(&RegionValues::moustache);
    out.edge.se = stddev(&RegionValues::edge);
    out.diagonal_upstream.se = stddev(&RegionValues::diagonal_upstream);
    out.resamples = draws.size();
    return out;
}

/// Scalar comparison f(values_a, values_b) of two ensembles run with the same
/// seed and block layout, so that block b of each holds the same noise
/// realizations. Blocks are resampled in pairs, which cancels the shared noise
/// in the standard error.
template <typename F>
Estimate paired_comparison(std::span<const CorrelationAccumulator> a, double horizon_a,
                           std::span<const CorrelationAccumulator> b, double horizon_b, F&& f,
                           const RegionGeometry& geom = {}, const CorrelationOptions& opt = {},
                           std::size_t resamples = 200, std::uint64_t seed = 0x5eedULL) {
    if (a.empty() || b.empty()) throw InsufficientSamples(0, 2);
    if (a.size() != b.size()) throw GridMismatch(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k)
        if (a[k].count() != b[k].count())
            throw ConfigError("paired_comparison: block " + std::to_string(k) + " holds different sample counts");
    auto pool = [](std::span<const CorrelationAccumulator> blocks, std::span<const std::size_t> picks) {
        CorrelationAccumulator acc(blocks.front().grid(), blocks.front().decimation());
        for (std::size_t k : picks) acc.merge(blocks[k]);
        return acc;
    };
    auto compare = [&](std::span<const std::size_t> picks) {
        return f(region_means(g2_map(pool(a, picks), opt), horizon_a, geom),
                 region_means(g2_map(pool(b, picks), opt), horizon_b, geom));
    };
    std::vector<std::size_t> populated;
    for (std::size_t k = 0; k < a.size(); ++k)
        if (a[k].count() > 0) populated.push_back(k);
    Estimate out{compare(populated), 0.0};
    if (populated.size() < 2 || resamples == 0) return out;

    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<std::size_t> pick(0, populated.size() - 1);
    std::vector<std::size_t> picks(populated.size());
    std::vector<double> draws;
    for (std::size_t r = 0; r < resamples; ++r) {
        for (auto& p : picks) p = populated[pick(gen)];
        const double v = compare(picks);
        if (std::isfinite(v)) draws.push_back(v);
    }
    if (draws.size() < 2) {
        out.se = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    double mean = 0.0;
    for (double v : draws) mean += v;
    mean /= static_cast<double>(draws.size());
    double ss = 0.0;
    for (double v : draws) ss += (v - mean) * (v - mean);
    out.se = std::sqrt(ss / static_cast<double>(draws.size() - 1));
    return out;
}

}  // namespace polariton
