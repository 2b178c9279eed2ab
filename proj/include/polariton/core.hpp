// Units, grid, cavity parameters and spatial profiles shared by every module.
//
// Internal units: lengths in micrometres, times in picoseconds, energies as
// angular frequencies in 1/ps. Energies quoted in meV are divided by hbar on
// ingestion.
#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace polariton {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

/// A field amplitude became NaN/Inf; the caller should reduce dt.
struct NonFinite : Error {
    explicit NonFinite(std::size_t index, std::string what = "non-finite field amplitude")
        : Error(what + " at grid index " + std::to_string(index)), grid_index(index) {}
    std::size_t grid_index;
};

// ---------------------------------------------------------------------------
// Physical constants
// ---------------------------------------------------------------------------

namespace constants {
/// Reduced Planck constant in meV ps.
inline constexpr double hbar_mev_ps = 0.6582119569;

// CODATA 2018 SI values used to derive hbar^2/(2 m_e).
inline constexpr double hbar_si = 1.054571817e-34;      // J s
inline constexpr double electron_mass_si = 9.1093837015e-31;  // kg
inline constexpr double joule_in_mev = 1.0 / 1.602176634e-22;

/// hbar^2/(2 m_e) in meV um^2 (about 3.81e-5).
inline constexpr double hbar2_over_2me_mev_um2 =
    hbar_si * hbar_si / (2.0 * electron_mass_si) * joule_in_mev * 1e12;
}  // namespace constants

inline constexpr double mev_to_angfreq(double e_mev) { return e_mev / constants::hbar_mev_ps; }
inline constexpr double angfreq_to_mev(double w) { return w * constants::hbar_mev_ps; }

/// hbar/(2 m*) in um^2/ps for an effective mass given in electron masses.
inline constexpr double kinetic_coefficient(double mass_in_electron_masses) {
    return constants::hbar2_over_2me_mev_um2 / mass_in_electron_masses / constants::hbar_mev_ps;
}

// ---------------------------------------------------------------------------
// Cavity parameters
// ---------------------------------------------------------------------------

struct CavityParams {
    double gamma = 0.0;    ///< loss rate [1/ps]
    double g = 0.0;        ///< interaction strength [1/(ps um)]
    double kinetic = 0.0;  ///< hbar/(2 m*) [um^2/ps]
    double omega0 = 0.0;   ///< lower-polariton band bottom [1/ps]
    double omega_p = 0.0;  ///< pump frequency [1/ps]

    /// omega_p - omega0.
    double detuning() const { return omega_p - omega0; }
    /// hbar/m* = 2 hbar/(2m*); converts a phase gradient into a velocity.
    double hbar_over_mass() const { return 2.0 * kinetic; }
    /// Low-k speed of excitations sqrt(hbar g n / m*).
    double sound_speed(double n) const { return std::sqrt(hbar_over_mass() * g * std::max(n, 0.0)); }

    /// lossless permits gamma = 0, the conservative limit used by the integrator.
    void validate(bool lossless = false) const {
        if (!(gamma > 0.0) && !(lossless && gamma == 0.0)) throw ConfigError("cavity: gamma must be > 0");
        if (!(g >= 0.0)) throw ConfigError("cavity: g must be >= 0");
        if (!(kinetic > 0.0)) throw ConfigError("cavity: kinetic coefficient must be > 0");
        if (!std::isfinite(omega0) || !std::isfinite(omega_p))
            throw ConfigError("cavity: omega0/omega_p must be finite");
    }

    bool operator==(const CavityParams&) const = default;
};

/// Default microcavity:
/// hbar*gamma = 0.047 meV, hbar*g = 0.0003 meV um, m* = 3e-5 m_e,
/// hbar*(omega_p - omega0) = 0.49 meV. The band bottom is the frequency origin.
inline CavityParams default_cavity_params() {
    CavityParams p;
    p.gamma = mev_to_angfreq(0.047);
    p.g = mev_to_angfreq(0.0003);
    p.kinetic = kinetic_coefficient(3e-5);
    p.omega0 = 0.0;
    p.omega_p = mev_to_angfreq(0.49);
    return p;
}

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

class Grid {
public:
    Grid() = default;
    Grid(double x_min, double x_max, std::size_t n_points, double dt)
        : x_min_(x_min), x_max_(x_max), n_(n_points), dt_(dt) {
        if (!(x_max > x_min)) throw ConfigError("grid: x_max must exceed x_min");
        if (n_points < 2 || !std::has_single_bit(n_points))
            throw ConfigError("grid: n_points must be a power of two >= 2");
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("grid: dt must be > 0");
    }

    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    std::size_t size() const { return n_; }
    double dx() const { return (x_max_ - x_min_) / static_cast<double>(n_); }
    double dt() const { return dt_; }
    double length() const { return x_max_ - x_min_; }
    double x(std::size_t i) const { return x_min_ + static_cast<double>(i) * dx(); }
    double k_max() const { return std::numbers::pi / dx(); }

    /// Wavenumber of FFT bin i (standard FFT ordering).
    double k(std::size_t i) const {
        const auto n = static_cast<std::ptrdiff_t>(n_);
        auto m = static_cast<std::ptrdiff_t>(i);
        if (m >= n / 2) m -= n;
        return 2.0 * std::numbers::pi * static_cast<double>(m) / length();
    }

    std::vector<double> coordinates() const {
        std::vector<double> xs(n_);
        for (std::size_t i = 0; i < n_; ++i) xs[i] = x(i);
        return xs;
    }

    /// Index of the grid point closest to position xp (clamped).
    std::size_t index_of(double xp) const {
        const double r = std::round((xp - x_min_) / dx());
        if (r <= 0.0) return 0;
        if (r >= static_cast<double>(n_ - 1)) return n_ - 1;
        return static_cast<std::size_t>(r);
    }

    /// Largest dt allowed by dt <= safety / (k_max^2 hbar/(2m*)).
    double max_stable_dt(double kinetic, double safety) const {
        return safety / (k_max() * k_max() * kinetic);
    }

    void check_time_step(double kinetic, double safety) const {
        if (!(safety > 0.0 && safety <= 1.0))
            throw ConfigError("grid: stability_safety must lie in (0, 1]");
        if (dt_ > max_stable_dt(kinetic, safety) * (1.0 + 1e-12))
            throw ConfigError("grid: dt=" + std::to_string(dt_) + " exceeds stability bound " +
                              std::to_string(max_stable_dt(kinetic, safety)));
    }

    Grid with_dt(double dt) const { return Grid(x_min_, x_max_, n_, dt); }

    bool operator==(const Grid&) const = default;

private:
    double x_min_ = 0.0;
    double x_max_ = 1.0;
    std::size_t n_ = 2;
    double dt_ = 1.0;
};

// ---------------------------------------------------------------------------
// Pump and potential profiles
// ---------------------------------------------------------------------------

struct PumpSegment {
    double x_start = 0.0;    ///< [um]
    double x_end = 0.0;      ///< [um]
    double amplitude = 0.0;  ///< |F_p| [1/(ps um^{1/2})]
    double k_p = 0.0;        ///< pump wavevector [1/um]
    bool operator==(const PumpSegment&) const = default;
};

class PumpProfile {
public:
    PumpProfile() = default;
    explicit PumpProfile(std::vector<PumpSegment> segments, double smoothing = 0.0)
        : segments_(std::move(segments)), smoothing_(smoothing) {
        validate();
    }

    const std::vector<PumpSegment>& segments() const { return segments_; }
    std::vector<PumpSegment>& segments() { return segments_; }
    double smoothing() const { return smoothing_; }
    void set_smoothing(double w) { smoothing_ = w; }
    bool empty() const { return segments_.empty(); }

    void validate() const {
        if (!(smoothing_ >= 0.0)) throw ConfigError("pump: smoothing must be >= 0");
        for (std::size_t a = 0; a < segments_.size(); ++a) {
            const auto& s = segments_[a];
            if (!(s.x_end > s.x_start)) throw ConfigError("pump: segment with x_end <= x_start");
            if (!(s.amplitude >= 0.0)) throw ConfigError("pump: negative amplitude");
            for (std::size_t b = a + 1; b < segments_.size(); ++b) {
                const auto& t = segments_[b];
                if (s.x_start < t.x_end && t.x_start < s.x_end)
                    throw ConfigError("pump: overlapping segments");
            }
        }
    }

    /// Envelope weight of segment s at x: 1 inside, 0 outside, tanh edges when smoothed.
    double window(const PumpSegment& s, double x) const {
        if (smoothing_ == 0.0) return (x >= s.x_start && x < s.x_end) ? 1.0 : 0.0;
        return 0.5 * (std::tanh((x - s.x_start) / smoothing_) - std::tanh((x - s.x_end) / smoothing_));
    }

    /// Contribution of one segment at unit amplitude: window * exp(i k_p x).
    cplx segment_shape(std::size_t seg, double x) const {
        const auto& s = segments_.at(seg);
        const double w = window(s, x);
        if (w == 0.0) return {0.0, 0.0};
        return w * std::polar(1.0, s.k_p * x);
    }

    cplx operator()(double x) const {
        cplx f{0.0, 0.0};
        for (std::size_t s = 0; s < segments_.size(); ++s)
            f += segments_[s].amplitude * segment_shape(s, x);
        return f;
    }

    std::vector<cplx> sample(const Grid& grid) const {
        std::vector<cplx> out(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) out[i] = (*this)(grid.x(i));
        return out;
    }

    bool operator==(const PumpProfile&) const = default;

private:
    std::vector<PumpSegment> segments_;
    double smoothing_ = 0.0;
};

enum class PotentialKind { none, gaussian_defect };

struct PotentialProfile {
    PotentialKind kind = PotentialKind::none;
    double center = 0.0;  ///< x0 [um]
    double depth = 0.0;   ///< V0 [1/ps]; negative is attractive
    double width = 0.5;   ///< sigma [um]

    static PotentialProfile gaussian(double center, double depth, double width) {
        PotentialProfile p{PotentialKind::gaussian_defect, center, depth, width};
        p.validate();
        return p;
    }

    void validate() const {
        if (kind == PotentialKind::gaussian_defect && !(width > 0.0))
            throw ConfigError("defect: width must be > 0");
    }

    double operator()(double x) const {
        if (kind == PotentialKind::none) return 0.0;
        const double u = (x - center) / width;
        return depth * std::exp(-0.5 * u * u);
    }

    std::vector<double> sample(const Grid& grid) const {
        std::vector<double> out(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) out[i] = (*this)(grid.x(i));
        return out;
    }

    bool operator==(const PotentialProfile&) const = default;
};

}  // namespace polariton
