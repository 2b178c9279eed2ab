// Bogoliubov dispersion of a homogeneous polariton fluid: closed-form
// branches, local plane-wave modes at fixed laboratory frequency, and the
// edges of the frequency band over which scattering at the horizon mixes
// positive- and negative-norm modes.
//
// Every branch has the form
//     omega_pm(k) = +-sqrt((a d^2 + lo)(a d^2 + hi)) + v d - i gamma/2,   d = k - k_ref,
// with a = hbar/2m*. For a pumped fluid lo = g n - Delta_p and
// hi = 3 g n - Delta_p; a ballistic fluid has lo = 0, hi = 2 g n (the pumped
// form exactly at the sonic point). The factored radicand keeps the band
// bottom exact at the sonic point.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "polariton/bistability.hpp"
#include "polariton/core.hpp"
#include "polariton/polynomial.hpp"

namespace polariton {

struct RootResidualTooLarge : Error {
    RootResidualTooLarge(double omega, double residual)
        : Error("local_modes: root residual " + std::to_string(residual) + " at omega=" +
                std::to_string(omega)),
          omega(omega), residual(residual) {}
    double omega;
    double residual;
};

struct EmptyBand : Error {
    EmptyBand(double lo, double hi)
        : Error("no scattering band: omega_min=" + std::to_string(lo) +
                " >= omega_max=" + std::to_string(hi)),
          omega_min(lo), omega_max(hi) {}
    double omega_min;
    double omega_max;
};

/// A pair of complex frequencies on the positive- and negative-norm branches.
struct BranchPair {
    cplx plus;
    cplx minus;
};

enum class Region { pumped, ballistic };

inline const char* to_string(Region r) { return r == Region::pumped ? "pumped" : "ballistic"; }

struct BranchParams {
    Region region = Region::pumped;
    double n = 0.0;        ///< density [1/um]
    double delta_p = 0.0;  ///< effective detuning, pumped only [1/ps]
    double k_ref = 0.0;    ///< k_p (pumped) or k0 = m* v / hbar (ballistic) [1/um]
    double v = 0.0;        ///< flow velocity [um/ps]
    CavityParams params;

    /// Pumped fluid whose phase gradient equals the pump wavevector.
    static BranchParams pumped(const CavityParams& p, double n, double k_p) {
        return {Region::pumped, n, effective_detuning(p, k_p), k_p, p.hbar_over_mass() * k_p, p};
    }
    /// Pumped fluid with explicit detuning and flow velocity.
    static BranchParams pumped(const CavityParams& p, double n, double delta_p, double k_p, double v) {
        return {Region::pumped, n, delta_p, k_p, v, p};
    }
    static BranchParams ballistic(const CavityParams& p, double n, double v) {
        return {Region::ballistic, n, 0.0, v / p.hbar_over_mass(), v, p};
    }
    /// Pumped fluid exactly at the sonic point g n = Delta_p(k_p).
    static BranchParams sonic(const CavityParams& p, double k_p) {
        const double n = sonic_point(effective_detuning(p, k_p), p).n;
        return {Region::pumped, n, p.g * n, k_p, p.hbar_over_mass() * k_p, p};
    }

    double interaction() const { return params.g * n; }
    /// lo and hi in (a d^2 + lo)(a d^2 + hi).
    double offset_lo() const { return region == Region::pumped ? interaction() - delta_p : 0.0; }
    double offset_hi() const {
        return region == Region::pumped ? 3.0 * interaction() - delta_p : 2.0 * interaction();
    }
    double sound_speed() const { return params.sound_speed(n); }

    void validate() const {
        if (!(n >= 0.0)) throw ConfigError("branch: density must be >= 0");
        if (region == Region::ballistic && delta_p != 0.0)
            throw ConfigError("branch: ballistic region takes no detuning");
    }
};

namespace detail {

inline cplx radicand(cplx d, double a, double lo, double hi) {
    const cplx kin = a * d * d;
    return (kin + lo) * (kin + hi);
}

inline BranchPair branches(cplx d, double a, double lo, double hi, double v, double gamma) {
    const cplx s = std::sqrt(radicand(d, a, lo, hi));
    const cplx damp{0.0, -0.5 * gamma};
    return {s + v * d + damp, -s + v * d + damp};
}

}  // namespace detail

/// Fluid-frame dispersion exactly at the sonic point (Delta_p = g n).
inline BranchPair omega_sonic(double k, double n, const CavityParams& p) {
    return detail::branches(cplx{k, 0.0}, p.kinetic, 0.0, 2.0 * p.g * n, 0.0, p.gamma);
}

/// Laboratory-frame dispersion of a pumped fluid; negative radicands give
/// imaginary parts that flag dynamical instability.
inline BranchPair omega_lab_pumped(double k, const BranchParams& b) {
    if (b.region != Region::pumped) throw ConfigError("omega_lab_pumped: region must be pumped");
    return detail::branches(cplx{k - b.k_ref, 0.0}, b.params.kinetic, b.offset_lo(), b.offset_hi(),
                            b.v, b.params.gamma);
}

/// Laboratory-frame dispersion of a freely flowing (unpumped) fluid.
inline BranchPair omega_lab_ballistic(double k, const BranchParams& b) {
    if (b.region != Region::ballistic) throw ConfigError("omega_lab_ballistic: region must be ballistic");
    return detail::branches(cplx{k - b.k_ref, 0.0}, b.params.kinetic, b.offset_lo(), b.offset_hi(),
                            b.v, b.params.gamma);
}

inline BranchPair omega_lab(double k, const BranchParams& b) {
    return b.region == Region::pumped ? omega_lab_pumped(k, b) : omega_lab_ballistic(k, b);
}

/// Fluid-frame dispersion for an arbitrary working point on the S-curve.
inline BranchPair omega_fluid_frame_general(double k, double n, double delta_p, const CavityParams& p) {
    const double gn = p.g * n;
    return detail::branches(cplx{k, 0.0}, p.kinetic, gn - delta_p, 3.0 * gn - delta_p, 0.0, p.gamma);
}

/// Wavenumber window where the fluid-frame radicand is negative.
struct InstabilityWindow {
    double k_lo = 0.0;
    double k_hi = 0.0;
    double max_growth_rate = 0.0;  ///< max over the window of Im(omega_+) [1/ps]
    bool dynamically_unstable() const { return max_growth_rate > 0.0; }
};

inline std::optional<InstabilityWindow> instability_window(double n, double delta_p, const CavityParams& p) {
    const double gn = p.g * n;
    const double a = p.kinetic;
    // (a k^2 + 2gn - D)^2 < (gn)^2  <=>  D - 3gn < a k^2 < D - gn
    const double hi = delta_p - gn;
    if (!(hi > 0.0)) return std::nullopt;
    const double lo = std::max(0.0, delta_p - 3.0 * gn);
    InstabilityWindow w;
    w.k_lo = std::sqrt(lo / a);
    w.k_hi = std::sqrt(hi / a);
    // |R| is largest where a k^2 + 2gn - D is closest to zero.
    const double q = std::max(0.0, 2.0 * gn - delta_p);
    w.max_growth_rate = std::sqrt(gn * gn - q * q) - 0.5 * p.gamma;
    return w;
}

// ---------------------------------------------------------------------------
// Local modes
// ---------------------------------------------------------------------------

enum class ModeKind { propagating, evanescent_growing, evanescent_decaying };

inline const char* to_string(ModeKind k) {
    switch (k) {
        case ModeKind::propagating: return "propagating";
        case ModeKind::evanescent_growing: return "evanescent_growing";
        case ModeKind::evanescent_decaying: return "evanescent_decaying";
    }
    return "?";
}

struct LocalMode {
    cplx k;                 ///< laboratory wavenumber [1/um]
    ModeKind kind = ModeKind::propagating;
    int norm_sign = +1;     ///< +1 on the omega_+ branch, -1 on omega_-
    double group_velocity = std::numeric_limits<double>::quiet_NaN();  ///< propagating only
    double residual = 0.0;  ///< relative residual against the unsquared relation
};

struct ModeSet {
    double omega = 0.0;
    std::vector<LocalMode> roots;

    std::size_t count(ModeKind kind) const {
        std::size_t c = 0;
        for (const auto& r : roots) c += r.kind == kind;
        return c;
    }
    std::size_t propagating() const { return count(ModeKind::propagating); }
    std::size_t negative_norm_propagating() const {
        std::size_t c = 0;
        for (const auto& r : roots) c += r.kind == ModeKind::propagating && r.norm_sign < 0;
        return c;
    }
};

struct LocalModeOptions {
    double k_im_tol = 1e-6;         ///< [1/um]; below this a root is propagating
    double max_residual = 1e-9;     ///< relative residual that triggers RootResidualTooLarge
    int newton_iterations = 2;
};

/// Coefficients (ascending in d = k - k_ref) of the squared relation
/// (omega - v d)^2 = (a d^2 + lo)(a d^2 + hi).
inline std::array<double, 5> mode_quartic(double omega, const BranchParams& b) {
    const double a = b.params.kinetic;
    const double lo = b.offset_lo();
    const double hi = b.offset_hi();
    return {lo * hi - omega * omega, 2.0 * omega * b.v, a * (lo + hi) - b.v * b.v, 0.0, a * a};
}

/// Residual of a wavenumber against both unsquared branches (dissipative
/// shift removed); returns (relative residual, branch sign).
inline std::pair<double, int> branch_residual(double omega, cplx d, const BranchParams& b) {
    const cplx s = std::sqrt(detail::radicand(d, b.params.kinetic, b.offset_lo(), b.offset_hi()));
    const cplx lhs = omega - b.v * d;
    const double r_plus = std::abs(lhs - s);
    const double r_minus = std::abs(lhs + s);
    const double scale = std::max({std::abs(omega), std::abs(b.v * d), std::abs(s), b.interaction(),
                                   b.params.kinetic * std::norm(d), 1e-300});
    return r_plus <= r_minus ? std::pair{r_plus / scale, +1} : std::pair{r_minus / scale, -1};
}

/// Analytic group velocity d omega_pm / dk at a real wavenumber offset d.
inline double group_velocity(double d, int norm_sign, const BranchParams& b) {
    const double a = b.params.kinetic;
    const double kin = a * d * d;
    const double R = (kin + b.offset_lo()) * (kin + b.offset_hi());
    if (R <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    const double dR = 2.0 * a * d * (2.0 * kin + b.offset_lo() + b.offset_hi());
    return b.v + norm_sign * dR / (2.0 * std::sqrt(R));
}

/// The four local plane-wave modes at real laboratory frequency omega,
/// found on the conservative part of the dispersion (the uniform -i gamma/2
/// shift is common to all modes).
inline ModeSet local_modes(double omega, const BranchParams& b, const LocalModeOptions& opt = {}) {
    b.validate();
    const auto coeffs = mode_quartic(omega, b);
    const auto ds = poly::roots(coeffs, opt.newton_iterations);
    ModeSet set;
    set.omega = omega;
    for (cplx d : ds) {
        LocalMode m;
        const bool real_root = std::abs(d.imag()) < opt.k_im_tol;
        if (real_root) {
            // Re-polish on the real axis where the relation is analytic.
            d = cplx{d.real(), 0.0};
            for (int it = 0; it < opt.newton_iterations; ++it)
                d = poly::newton_step(coeffs, d);
            d = cplx{d.real(), 0.0};
        }
        const auto [res, sign] = branch_residual(omega, d, b);
        m.k = d + b.k_ref;
        m.residual = res;
        m.norm_sign = sign;
        if (real_root) {
            m.kind = ModeKind::propagating;
            m.group_velocity = group_velocity(d.real(), sign, b);
        } else {
            m.kind = d.imag() > 0.0 ? ModeKind::evanescent_decaying : ModeKind::evanescent_growing;
        }
        if (!(res <= opt.max_residual)) throw RootResidualTooLarge(omega, res);
        set.roots.push_back(m);
    }
    return set;
}

// ---------------------------------------------------------------------------
// Band edges
// ---------------------------------------------------------------------------

struct BandEdge {
    double omega = 0.0;
    double k = 0.0;  ///< laboratory wavenumber where the extremum is attained
};

namespace detail {

// Golden-section minimisation of f on [lo, hi].
template <typename F>
double golden_minimum(F&& f, double lo, double hi) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - r * (hi - lo);
    double x2 = lo + r * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? x1 : x2;
}

// Minimum of f over real d in [-span, span]: dense scan, golden refinement,
// and the kink candidate d = 0.
template <typename F>
std::pair<double, double> scan_minimum(F&& f, double span, std::size_t n_scan = 4001) {
    double best_d = 0.0;
    double best_f = f(0.0);
    std::size_t best_i = n_scan;
    const double h = 2.0 * span / static_cast<double>(n_scan - 1);
    for (std::size_t i = 0; i < n_scan; ++i) {
        const double d = -span + h * static_cast<double>(i);
        const double val = f(d);
        if (val < best_f) {
            best_f = val;
            best_d = d;
            best_i = i;
        }
    }
    if (best_i != n_scan) {
        const double d = golden_minimum(f, best_d - h, best_d + h);
        const double val = f(d);
        if (val < best_f) {
            best_f = val;
            best_d = d;
        }
    }
    return {best_d, best_f};
}

inline double scan_span(const BranchParams& b) {
    const double a = b.params.kinetic;
    return 4.0 * (std::abs(b.v) / a + std::sqrt((std::abs(b.offset_lo()) + std::abs(b.offset_hi())) / a)) + 1.0;
}

}  // namespace detail

/// Bottom of the positive-norm branch: min over real k of Re omega_+.
inline BandEdge lower_band_edge(const BranchParams& b) {
    auto f = [&](double d) {
        return detail::branches(cplx{d, 0.0}, b.params.kinetic, b.offset_lo(), b.offset_hi(), b.v,
                                b.params.gamma).plus.real();
    };
    const auto [d, val] = detail::scan_minimum(f, detail::scan_span(b));
    return {val, d + b.k_ref};
}

/// Top of the negative-norm branch at positive laboratory frequency:
/// max over real k of Re omega_-, clipped at zero.
inline BandEdge upper_band_edge(const BranchParams& b) {
    auto f = [&](double d) {
        return -detail::branches(cplx{d, 0.0}, b.params.kinetic, b.offset_lo(), b.offset_hi(), b.v,
                                 b.params.gamma).minus.real();
    };
    const auto [d, val] = detail::scan_minimum(f, detail::scan_span(b));
    const double top = -val;
    if (!(top > 0.0)) return {0.0, b.k_ref};
    return {top, d + b.k_ref};
}

struct ScatteringBand {
    double omega_min = 0.0;
    double omega_max = 0.0;
    double width() const { return omega_max - omega_min; }
};

/// Frequency interval [omega_min, omega_max] over which an upstream
/// positive-norm mode coexists with downstream negative-norm modes.
inline ScatteringBand band_edges(const BranchParams& upstream, const BranchParams& downstream) {
    return {std::max(0.0, lower_band_edge(upstream).omega), upper_band_edge(downstream).omega};
}

inline ScatteringBand scattering_band(const BranchParams& upstream, const BranchParams& downstream) {
    const auto band = band_edges(upstream, downstream);
    if (band.omega_min >= band.omega_max) throw EmptyBand(band.omega_min, band.omega_max);
    return band;
}

}  // namespace polariton
