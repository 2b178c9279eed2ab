// Homogeneous pump-density response of a coherently driven polariton fluid:
// the bistability S-curve, its turning points, the sonic point and the
// configuration constraints of the waterfall geometry.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "polariton/core.hpp"
#include "polariton/polynomial.hpp"

namespace polariton {

struct InvalidDetuning : Error {
    explicit InvalidDetuning(double delta)
        : Error("sonic point requires positive effective detuning and g > 0, got delta_p=" +
                std::to_string(delta)),
          delta_p(delta) {}
    double delta_p;
};

enum class Stability { stable, unstable };

inline const char* to_string(Stability s) { return s == Stability::stable ? "stable" : "unstable"; }

struct DensityRoot {
    double n = 0.0;  ///< [1/um]
    Stability stability = Stability::stable;
};

struct TurningPoints {
    double F1 = 0.0;  ///< upper switching amplitude (end of the low-density branch)
    double F2 = 0.0;  ///< lower switching amplitude (end of the high-density branch)
    double n1 = 0.0;  ///< density at F1 (smaller)
    double n2 = 0.0;  ///< density at F2 (larger)
};

struct SonicPoint {
    double n = 0.0;
    double F = 0.0;
};

/// Delta_p = omega_p - omega0 - hbar k_p^2 / 2m*.
inline double effective_detuning(const CavityParams& p, double k_p) {
    return p.detuning() - p.kinetic * k_p * k_p;
}

/// Threshold detuning gamma*sqrt(3)/2 above which the response is bistable.
inline double bistability_threshold(const CavityParams& p) { return p.gamma * std::sqrt(3.0) / 2.0; }

/// |F_p|^2 as a function of density: ((g n - Delta_p)^2 + gamma^2/4) n.
inline double pump_intensity(double n, double delta_p, const CavityParams& p) {
    const double u = p.g * n - delta_p;
    return (u * u + 0.25 * p.gamma * p.gamma) * n;
}

/// d|F_p|^2/dn; negative on the unstable branch.
inline double pump_intensity_slope(double n, double delta_p, const CavityParams& p) {
    const double u = p.g * n;
    return 3.0 * u * u - 4.0 * delta_p * u + delta_p * delta_p + 0.25 * p.gamma * p.gamma;
}

inline std::optional<TurningPoints> turning_points(double delta_p, const CavityParams& p) {
    if (p.g <= 0.0 || delta_p <= 0.0) return std::nullopt;
    // 3 u^2 - 4 Delta u + (Delta^2 + gamma^2/4) = 0 with u = g n
    double disc = delta_p * delta_p - 0.75 * p.gamma * p.gamma;
    // Rounding at the threshold itself still gives the double root.
    if (disc < 0.0 && disc > -8.0 * std::numeric_limits<double>::epsilon() * delta_p * delta_p) disc = 0.0;
    if (disc < 0.0) return std::nullopt;
    const double root = std::sqrt(disc);
    const double u1 = (2.0 * delta_p - root) / 3.0;
    const double u2 = (2.0 * delta_p + root) / 3.0;
    TurningPoints tp;
    tp.n1 = u1 / p.g;
    tp.n2 = u2 / p.g;
    tp.F1 = std::sqrt(pump_intensity(tp.n1, delta_p, p));
    tp.F2 = std::sqrt(pump_intensity(tp.n2, delta_p, p));
    return tp;
}

inline SonicPoint sonic_point(double delta_p, const CavityParams& p) {
    if (!(delta_p > 0.0) || !(p.g > 0.0)) throw InvalidDetuning(delta_p);
    SonicPoint s;
    s.n = delta_p / p.g;
    s.F = std::sqrt(0.25 * p.gamma * p.gamma * delta_p / p.g);
    return s;
}

namespace detail {

// f(u) = u((u - D)^2 + gamma^2/4) - g F^2, monotone between the brackets.
inline double response_cubic(double u, double delta, double gamma, double target) {
    const double d = u - delta;
    return u * (d * d + 0.25 * gamma * gamma) - target;
}

inline double response_cubic_slope(double u, double delta, double gamma) {
    return 3.0 * u * u - 4.0 * delta * u + delta * delta + 0.25 * gamma * gamma;
}

// Safeguarded Newton on a sign-changing bracket [lo, hi].
inline double bracketed_root(double guess, double lo, double hi, double delta, double gamma,
                             double target) {
    double f_lo = response_cubic(lo, delta, gamma, target);
    if (f_lo == 0.0) return lo;
    double x = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f = response_cubic(x, delta, gamma, target);
        if (f == 0.0) return x;
        if ((f < 0.0) == (f_lo < 0.0)) {
            lo = x;
            f_lo = f;
        } else {
            hi = x;
        }
        const double df = response_cubic_slope(x, delta, gamma);
        double next = df != 0.0 ? x - f / df : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x) ||
            hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(hi))
            return next;
        x = next;
    }
    return x;
}

}  // namespace detail

/// All non-negative densities n solving ((g n - Delta_p)^2 + gamma^2/4) n = F^2,
/// ascending, each labelled by the sign of d|F|^2/dn. One or three roots.
inline std::vector<DensityRoot> density_response(double F_abs, double delta_p, const CavityParams& p) {
    if (!(F_abs >= 0.0)) throw Error("density_response: F_abs must be >= 0");
    if (F_abs == 0.0) return {DensityRoot{0.0, Stability::stable}};
    const double gamma = p.gamma;
    if (p.g == 0.0) {
        const double n = F_abs * F_abs / (delta_p * delta_p + 0.25 * gamma * gamma);
        return {DensityRoot{n, Stability::stable}};
    }

    // Work in u = g n: u^3 - 2 D u^2 + (D^2 + gamma^2/4) u - g F^2 = 0.
    const double target = p.g * F_abs * F_abs;
    const std::array<double, 4> coeffs{-target, delta_p * delta_p + 0.25 * gamma * gamma,
                                       -2.0 * delta_p, 1.0};
    const auto eig = poly::roots(coeffs, 1);

    const auto tp = turning_points(delta_p, p);
    const bool three = tp && F_abs > tp->F2 && F_abs < tp->F1;

    auto upper_bracket = [&](double lo) {
        double hi = std::max({lo, 2.0 * std::abs(delta_p), std::cbrt(target)}) + gamma + 1.0;
        while (detail::response_cubic(hi, delta_p, gamma, target) <= 0.0) hi *= 2.0;
        return hi;
    };

    std::vector<DensityRoot> out;
    if (three) {
        const double u1 = tp->n1 * p.g;
        const double u2 = tp->n2 * p.g;
        const std::array<std::pair<double, double>, 3> brackets{
            std::pair{0.0, u1}, std::pair{u1, u2}, std::pair{u2, upper_bracket(u2)}};
        for (std::size_t b = 0; b < 3; ++b) {
            const double guess = eig[b].real();
            const double u = detail::bracketed_root(guess, brackets[b].first, brackets[b].second,
                                                    delta_p, gamma, target);
            out.push_back({u / p.g, b == 1 ? Stability::unstable : Stability::stable});
        }
        return out;
    }

    // Single real root: the eigenvalue with the smallest imaginary part.
    cplx best = eig[0];
    for (const auto& z : eig)
        if (std::abs(z.imag()) < std::abs(best.imag())) best = z;
    double lo = 0.0;
    double hi = 0.0;
    if (tp && F_abs >= tp->F1) {
        lo = tp->n2 * p.g;
        hi = upper_bracket(lo);
    } else if (tp && F_abs <= tp->F2) {
        hi = tp->n1 * p.g;
    } else {
        hi = upper_bracket(0.0);
    }
    const double u = detail::bracketed_root(best.real(), lo, hi, delta_p, gamma, target);
    const double n = u / p.g;
    out.push_back({n, pump_intensity_slope(n, delta_p, p) < 0.0 ? Stability::unstable
                                                                : Stability::stable});
    return out;
}

// ---------------------------------------------------------------------------
// S-curve and hysteresis sweeps
// ---------------------------------------------------------------------------

struct CurveSample {
    double F = 0.0;
    double n = 0.0;
    double c_B = 0.0;
    Stability stability = Stability::stable;
};

struct BistabilityCurve {
    std::vector<CurveSample> samples;
    std::optional<double> F1;
    std::optional<double> F2;
    double delta_p = 0.0;
};

/// Tabulates the S-curve parametrised by density on [0, n_max].
inline BistabilityCurve bistability_curve(double delta_p, const CavityParams& p, double n_max,
                                          std::size_t n_samples) {
    BistabilityCurve curve;
    curve.delta_p = delta_p;
    if (auto tp = turning_points(delta_p, p)) {
        curve.F1 = tp->F1;
        curve.F2 = tp->F2;
    }
    curve.samples.reserve(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double n = n_max * static_cast<double>(i) / static_cast<double>(n_samples - 1);
        curve.samples.push_back({std::sqrt(pump_intensity(n, delta_p, p)), n, p.sound_speed(n),
                                 pump_intensity_slope(n, delta_p, p) < 0.0 ? Stability::unstable
                                                                           : Stability::stable});
    }
    return curve;
}

enum class SweepDirection { up, down };

/// Follows the hysteresis cycle: the up pass stays on the lowest root while it
/// exists, the down pass on the highest.
inline std::vector<CurveSample> hysteresis_sweep(double delta_p, const CavityParams& p,
                                                 const std::vector<double>& amplitudes,
                                                 SweepDirection direction) {
    // amplitudes must be ascending; the down pass walks them in reverse.
    std::vector<CurveSample> out;
    out.reserve(amplitudes.size());
    for (std::size_t idx = 0; idx < amplitudes.size(); ++idx) {
        const bool up = direction == SweepDirection::up;
        const double F = up ? amplitudes[idx] : amplitudes[amplitudes.size() - 1 - idx];
        const auto roots = density_response(F, delta_p, p);
        const DensityRoot r = up ? roots.front() : roots.back();
        out.push_back({F, r.n, p.sound_speed(r.n), r.stability});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Waterfall constraints
// ---------------------------------------------------------------------------

struct WaterfallParameters {
    CavityParams cavity;
    double k_up = 0.0;                ///< upstream pump wavevector [1/um]
    std::optional<double> k_down;     ///< downstream pump wavevector, if pumped
    std::optional<double> c_down;     ///< speed of excitations just after the defect
};

enum class Constraint {
    upstream_sonic,         ///< omega_p - omega0 > (3/2) m* v_u^2
    downstream_bistable,    ///< omega_p - omega0 > hbar k_d^2/2m* + gamma sqrt(3)/2
    bistable_width,         ///< width of the downstream bistable interval > 0
    downstream_upper_branch ///< c_d > sqrt((omega_p - omega0 - hbar k_d^2/2m*)/m*)
};

inline const char* to_string(Constraint c) {
    switch (c) {
        case Constraint::upstream_sonic: return "upstream_sonic";
        case Constraint::downstream_bistable: return "downstream_bistable";
        case Constraint::bistable_width: return "bistable_width";
        case Constraint::downstream_upper_branch: return "downstream_upper_branch";
    }
    return "?";
}

struct ConstraintViolation {
    Constraint constraint;
    double value = 0.0;  ///< left-hand side
    double bound = 0.0;  ///< quantity it must exceed
    std::string message;
};

/// Largest upstream pump wavevector compatible with a subsonic sonic-point flow.
inline double upstream_wavevector_bound(const CavityParams& p) {
    return std::sqrt(p.detuning() / (3.0 * p.kinetic));
}

/// Largest downstream pump wavevector for which a bistable regime exists.
inline double downstream_wavevector_bound(const CavityParams& p) {
    return std::sqrt((p.detuning() - bistability_threshold(p)) / p.kinetic);
}

/// |F_max|^2 - |F_min|^2 of the downstream bistable interval.
inline double bistable_interval_width(const CavityParams& p, double k_down) {
    const double d = effective_detuning(p, k_down);
    return (4.0 / 9.0 * d * d - 0.5 * p.gamma * p.gamma) * d / (3.0 * p.g);
}

inline std::vector<ConstraintViolation> validate_waterfall_config(const WaterfallParameters& w) {
    const auto& p = w.cavity;
    std::vector<ConstraintViolation> out;
    const double det = p.detuning();

    const double v_u = p.hbar_over_mass() * w.k_up;
    const double lhs_a = 1.5 * v_u * v_u / p.hbar_over_mass();  // (3/2) m* v^2 / hbar
    if (!(det > lhs_a))
        out.push_back({Constraint::upstream_sonic, det, lhs_a,
                       "upstream flow too fast for a subsonic sonic point (k_up=" +
                           std::to_string(w.k_up) + " > bound " +
                           std::to_string(upstream_wavevector_bound(p)) + ")"});

    if (w.k_down) {
        const double kd = *w.k_down;
        const double lhs_b = p.kinetic * kd * kd + bistability_threshold(p);
        if (!(det > lhs_b))
            out.push_back({Constraint::downstream_bistable, det, lhs_b,
                           "no downstream bistable regime (k_down=" + std::to_string(kd) + ")"});
        const double width = bistable_interval_width(p, kd);
        if (!(width > 0.0))
            out.push_back({Constraint::bistable_width, width, 0.0,
                           "downstream bistable interval has non-positive width"});
        if (w.c_down) {
            const double crit = std::sqrt(std::max(0.0, p.hbar_over_mass() * effective_detuning(p, kd)));
            if (!(*w.c_down > crit))
                out.push_back({Constraint::downstream_upper_branch, *w.c_down, crit,
                               "speed of excitations after the defect too low for the upper branch"});
        }
    }
    return out;
}

}  // namespace polariton
