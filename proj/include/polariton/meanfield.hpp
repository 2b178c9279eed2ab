// Mean-field dynamics of the driven-dissipative Gross-Pitaevskii equation in
// the frame rotating at the pump frequency,
//
//   i dPsi/dt = (omega0 - omega_p - a d^2/dx^2 + V + g(|Psi|^2 - offset)
//                - i Gamma(x)/2) Psi + F_p(x),
//
// with a = hbar/2m* and Gamma(x) = gamma plus an optional absorbing layer at
// the box edges. Integrated by symmetric (Strang) splitting: exact kinetic
// propagation in Fourier space, exact integration of the local part, and the
// additive pump as its own exactly solvable sub-flow.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polariton/bistability.hpp"
#include "polariton/core.hpp"
#include "polariton/fft.hpp"

namespace polariton {

/// Extra loss ramp over the outer part of the periodic box.
struct Absorber {
    double fraction = 0.05;  ///< width of each layer as a fraction of the box
    double strength = 5.0;   ///< extra loss at the outer edge [1/ps]; 0 disables

    bool enabled() const { return strength > 0.0 && fraction > 0.0; }

    double loss(const Grid& grid, double x) const {
        if (!enabled()) return 0.0;
        const double width = fraction * grid.length();
        const double from_left = x - grid.x_min();
        const double from_right = grid.x_max() - x;
        const double depth = std::max(width - from_left, width - from_right);
        if (depth <= 0.0) return 0.0;
        const double s = std::min(depth / width, 1.0);
        return strength * s * s;
    }

    bool inside(const Grid& grid, double x) const { return loss(grid, x) > 0.0; }

    bool operator==(const Absorber&) const = default;
};

struct FieldState {
    Grid grid;
    std::vector<cplx> psi;
    double t = 0.0;

    FieldState() = default;
    explicit FieldState(const Grid& g) : grid(g), psi(g.size(), cplx{0.0, 0.0}) {}
    FieldState(const Grid& g, std::vector<cplx> field, double time = 0.0)
        : grid(g), psi(std::move(field)), t(time) {
        if (psi.size() != grid.size()) throw ConfigError("FieldState: field length does not match grid");
    }

    double norm2() const {
        double s = 0.0;
        for (const auto& z : psi) s += std::norm(z);
        return s * grid.dx();
    }
};

// ---------------------------------------------------------------------------
// Split-step propagator
// ---------------------------------------------------------------------------

class SplitStepper {
public:
    /// nonlinear_offset is subtracted from |Psi|^2 in the interaction term
    /// (1/dx for Wigner-symmetrised fields, 0 for the mean field).
    SplitStepper(const Grid& grid, const CavityParams& params, const PotentialProfile& potential,
                 const Absorber& absorber = {}, double nonlinear_offset = 0.0)
        : grid_(grid), params_(params), fft_(grid.size()), loss_(grid.size()),
          kinetic_phase_(grid.size()), half_amp_(grid.size()), half_phase_(grid.size()),
          half_nl_(grid.size()) {
        params.validate(true);
        const std::size_t n = grid.size();
        const double dt = grid.dt();
        const double h = 0.5 * dt;
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double k = grid.k(i);
            kinetic_phase_[i] = std::polar(inv_n, -params.kinetic * k * k * dt);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double x = grid.x(i);
            const double loss = params.gamma + absorber.loss(grid, x);
            loss_[i] = loss;
            half_amp_[i] = std::exp(-0.5 * loss * h);
            half_phase_[i] = h * (params.omega0 - params.omega_p + potential(x) - params.g * nonlinear_offset);
            // integral of |Psi|^2 over the half step is |Psi0|^2 (1 - e^{-loss h}) / loss
            half_nl_[i] = params.g * (loss > 0.0 ? -std::expm1(-loss * h) / loss : h);
        }
    }

    const Grid& grid() const { return grid_; }
    const CavityParams& params() const { return params_; }
    /// Local loss rate gamma + absorber(x).
    std::span<const double> loss() const { return loss_; }

    /// Advances psi by one time step dt in place.
    void step(std::span<cplx> psi, std::span<const cplx> pump) {
        const double h = 0.5 * grid_.dt();
        add_pump(psi, pump, h);
        local_half_step(psi);
        kinetic_step(psi);
        local_half_step(psi);
        add_pump(psi, pump, h);
        check_finite(psi);
    }

    void kinetic_step(std::span<cplx> psi) {
        auto buf = fft_.data();
        std::copy(psi.begin(), psi.end(), buf.begin());
        fft_.forward();
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= kinetic_phase_[i];
        fft_.backward();
        std::copy(buf.begin(), buf.end(), psi.begin());
    }

    void local_half_step(std::span<cplx> psi) const {
        for (std::size_t i = 0; i < psi.size(); ++i) {
            const double phase = half_phase_[i] + half_nl_[i] * std::norm(psi[i]);
            psi[i] *= std::polar(half_amp_[i], -phase);
        }
    }

    static void add_pump(std::span<cplx> psi, std::span<const cplx> pump, double h) {
        if (pump.empty()) return;
        const cplx minus_ih{0.0, -h};
        for (std::size_t i = 0; i < psi.size(); ++i) psi[i] += minus_ih * pump[i];
    }

    static void check_finite(std::span<const cplx> psi) {
        double acc = 0.0;
        for (const auto& z : psi) acc += std::norm(z);
        if (std::isfinite(acc)) return;
        for (std::size_t i = 0; i < psi.size(); ++i)
            if (!std::isfinite(psi[i].real()) || !std::isfinite(psi[i].imag())) throw NonFinite(i);
        throw NonFinite(0, "field norm overflow");
    }

    /// Spectral second derivative.
    std::vector<cplx> second_derivative(std::span<const cplx> psi) {
        auto buf = fft_.data();
        std::copy(psi.begin(), psi.end(), buf.begin());
        fft_.forward();
        const double inv_n = 1.0 / static_cast<double>(buf.size());
        for (std::size_t i = 0; i < buf.size(); ++i) {
            const double k = grid_.k(i);
            buf[i] *= -k * k * inv_n;
        }
        fft_.backward();
        return {buf.begin(), buf.end()};
    }

private:
    Grid grid_;
    CavityParams params_;
    FftBuffer fft_;
    std::vector<double> loss_;
    std::vector<cplx> kinetic_phase_;
    std::vector<double> half_amp_;
    std::vector<double> half_phase_;
    std::vector<double> half_nl_;
};

/// One split step of the mean-field equation.
inline FieldState step_ddgpe(const FieldState& state, const CavityParams& params, const PumpProfile& pump,
                             const PotentialProfile& potential, double dt, const Absorber& absorber = {}) {
    const Grid grid = state.grid.with_dt(dt);
    SplitStepper stepper(grid, params, potential, absorber);
    FieldState next = state;
    const auto f = pump.sample(grid);
    stepper.step(next.psi, f);
    next.t += dt;
    return next;
}

// ---------------------------------------------------------------------------
// Hydrodynamic analysis
// ---------------------------------------------------------------------------

inline constexpr double default_n_floor = 1e-12;

struct MadelungFields {
    std::vector<double> n;
    std::vector<double> theta;
    std::vector<bool> phase_undefined;  ///< n < n_floor; theta interpolated there
};

/// n = |psi|^2 and the phase unwrapped along x (defined up to a constant).
inline MadelungFields madelung(std::span<const cplx> psi, double n_floor = default_n_floor) {
    const std::size_t size = psi.size();
    MadelungFields out{std::vector<double>(size), std::vector<double>(size, 0.0),
                       std::vector<bool>(size, false)};
    std::vector<std::size_t> valid;
    for (std::size_t i = 0; i < size; ++i) {
        if (!std::isfinite(psi[i].real()) || !std::isfinite(psi[i].imag()))
            throw NonFinite(i, "madelung: non-finite field");
        out.n[i] = std::norm(psi[i]);
        if (out.n[i] < n_floor)
            out.phase_undefined[i] = true;
        else
            valid.push_back(i);
    }
    if (valid.empty()) return out;

    constexpr double two_pi = 2.0 * std::numbers::pi;
    double prev_raw = std::arg(psi[valid[0]]);
    out.theta[valid[0]] = prev_raw;
    for (std::size_t j = 1; j < valid.size(); ++j) {
        const double raw = std::arg(psi[valid[j]]);
        double d = raw - prev_raw;
        d -= two_pi * std::round(d / two_pi);
        out.theta[valid[j]] = out.theta[valid[j - 1]] + d;
        prev_raw = raw;
    }
    // Fill undefined points by linear interpolation between valid neighbours.
    for (std::size_t i = 0; i < valid.front(); ++i) out.theta[i] = out.theta[valid.front()];
    for (std::size_t i = valid.back() + 1; i < size; ++i) out.theta[i] = out.theta[valid.back()];
    for (std::size_t j = 1; j < valid.size(); ++j) {
        const std::size_t a = valid[j - 1];
        const std::size_t b = valid[j];
        for (std::size_t i = a + 1; i < b; ++i) {
            const double w = static_cast<double>(i - a) / static_cast<double>(b - a);
            out.theta[i] = (1.0 - w) * out.theta[a] + w * out.theta[b];
        }
    }
    return out;
}

/// Im(psi* dpsi/dx) / |psi|^2 with a spectral derivative; NaN where n < n_floor.
inline std::vector<double> phase_gradient(std::span<const cplx> psi, const Grid& grid,
                                          double n_floor = default_n_floor) {
    FftBuffer fft(grid.size());
    auto buf = fft.data();
    std::copy(psi.begin(), psi.end(), buf.begin());
    fft.forward();
    const double inv_n = 1.0 / static_cast<double>(grid.size());
    for (std::size_t i = 0; i < buf.size(); ++i) {
        // The Nyquist bin has no well-defined derivative for real signals.
        const double k = (i == grid.size() / 2) ? 0.0 : grid.k(i);
        buf[i] *= cplx{0.0, k * inv_n};
    }
    fft.backward();
    std::vector<double> grad(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double n = std::norm(psi[i]);
        grad[i] = n < n_floor ? std::numeric_limits<double>::quiet_NaN()
                              : (std::conj(psi[i]) * buf[i]).imag() / n;
    }
    return grad;
}

enum class HorizonType { sub_to_super, super_to_sub };

inline const char* to_string(HorizonType h) {
    return h == HorizonType::sub_to_super ? "sub_to_super" : "super_to_sub";
}

struct Horizon {
    double x = 0.0;
    HorizonType type = HorizonType::sub_to_super;
};

struct MeanFieldSolution {
    Grid grid;
    std::vector<cplx> psi;
    std::vector<double> pump_abs;  ///< |F_p|(x)
    std::vector<double> n;
    std::vector<double> theta;
    std::vector<double> v;
    std::vector<double> c_B;
    std::vector<bool> phase_undefined;
    std::vector<bool> excluded;  ///< inside an absorbing layer
    std::vector<Horizon> horizons;
    double residual = 0.0;            ///< ||S(psi) - psi|| / (dt ||psi||) for one split step S [1/ps]
    double continuum_residual = 0.0;  ///< ||steady-state RHS|| / ||psi|| with a spectral Laplacian [1/ps]
    double change = 0.0;    ///< last ||psi(t+T)-psi(t)|| / ||psi||
    double t = 0.0;
    bool converged = false;

    /// First sub->super horizon, if any.
    std::optional<double> black_hole_horizon() const {
        for (const auto& h : horizons)
            if (h.type == HorizonType::sub_to_super) return h.x;
        return std::nullopt;
    }
};

struct NotConverged : Error {
    NotConverged(double change, double residual, std::shared_ptr<const MeanFieldSolution> sol)
        : Error("steady state not reached: change=" + std::to_string(change) +
                " residual=" + std::to_string(residual)),
          change(change), residual(residual), solution(std::move(sol)) {}
    double change;
    double residual;
    std::shared_ptr<const MeanFieldSolution> solution;
};

/// Zero crossings of v - c_B by linear interpolation, skipping points with
/// undefined phase or inside absorbing layers.
inline std::vector<Horizon> find_horizons(const MeanFieldSolution& s) {
    std::vector<Horizon> out;
    const std::size_t size = s.v.size();
    auto usable = [&](std::size_t i) {
        return !s.phase_undefined[i] && !(i < s.excluded.size() && s.excluded[i]) &&
               std::isfinite(s.v[i]) && std::isfinite(s.c_B[i]);
    };
    for (std::size_t i = 0; i + 1 < size; ++i) {
        if (!usable(i) || !usable(i + 1)) continue;
        const double f0 = s.v[i] - s.c_B[i];
        const double f1 = s.v[i + 1] - s.c_B[i + 1];
        if (f0 == 0.0 && f1 == 0.0) continue;
        if (f0 < 0.0 && f1 >= 0.0) {
            out.push_back({s.grid.x(i) + s.grid.dx() * f0 / (f0 - f1), HorizonType::sub_to_super});
        } else if (f0 > 0.0 && f1 <= 0.0) {
            out.push_back({s.grid.x(i) + s.grid.dx() * f0 / (f0 - f1), HorizonType::super_to_sub});
        }
    }
    return out;
}

struct AcousticMetric {
    std::vector<double> tt;
    std::vector<double> tx;
    std::vector<double> xx;
    std::vector<bool> degenerate;  ///< n <= n_floor; components NaN there
};

/// eta = (n/c^2) [[-(c^2 - v^2), -v], [-v, 1]] with c = c_B.
inline AcousticMetric acoustic_metric(const MeanFieldSolution& s, double n_floor = default_n_floor) {
    const std::size_t size = s.n.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    AcousticMetric m{std::vector<double>(size, nan), std::vector<double>(size, nan),
                     std::vector<double>(size, nan), std::vector<bool>(size, true)};
    for (std::size_t i = 0; i < size; ++i) {
        const double c2 = s.c_B[i] * s.c_B[i];
        if (!(s.n[i] > n_floor) || !(c2 > 0.0) || !std::isfinite(s.v[i])) continue;
        const double conformal = s.n[i] / c2;
        m.tt[i] = -conformal * (c2 - s.v[i] * s.v[i]);
        m.tx[i] = -conformal * s.v[i];
        m.xx[i] = conformal;
        m.degenerate[i] = false;
    }
    return m;
}

/// Fills the hydrodynamic profiles of a solution from its field.
inline void analyse(MeanFieldSolution& s, const CavityParams& params, const PumpProfile& pump,
                    const Absorber& absorber, double n_floor = default_n_floor) {
    const auto mf = madelung(s.psi, n_floor);
    s.n = mf.n;
    s.theta = mf.theta;
    s.phase_undefined = mf.phase_undefined;
    const auto grad = phase_gradient(s.psi, s.grid, n_floor);
    s.v.resize(grad.size());
    s.c_B.resize(grad.size());
    s.pump_abs.resize(grad.size());
    s.excluded.assign(grad.size(), false);
    for (std::size_t i = 0; i < grad.size(); ++i) {
        s.v[i] = params.hbar_over_mass() * grad[i];
        s.c_B[i] = params.sound_speed(s.n[i]);
        s.pump_abs[i] = std::abs(pump(s.grid.x(i)));
        s.excluded[i] = absorber.inside(s.grid, s.grid.x(i));
    }
    s.horizons = find_horizons(s);
}

// ---------------------------------------------------------------------------
// Relaxation to the steady state
// ---------------------------------------------------------------------------

/// Pump-amplitude schedule that lands bistable segments on the upper branch:
/// hold every such segment above its switching amplitude F1, then ramp down.
struct HysteresisOptions {
    bool enabled = true;
    double boost = 1.2;   ///< boosted amplitude = boost * F1 (if above the target)
    double hold = 100.0;  ///< [ps]
    double ramp = 200.0;  ///< [ps]

    double end() const { return enabled ? hold + ramp : 0.0; }
    bool operator==(const HysteresisOptions&) const = default;
};

struct RelaxOptions {
    double check_interval = 10.0;  ///< [ps]
    HysteresisOptions hysteresis;
    Absorber absorber;
    double n_floor = default_n_floor;
    double stability_safety = 0.5;
};

/// ||(omega0 - omega_p - a d^2 + V + g|psi|^2 - i Gamma/2) psi + F|| / ||psi||.
inline double steady_state_residual(SplitStepper& stepper, std::span<const cplx> psi,
                                    std::span<const cplx> pump, const PotentialProfile& potential) {
    const auto& p = stepper.params();
    const auto& grid = stepper.grid();
    const auto lap = stepper.second_derivative(psi);
    const auto loss = stepper.loss();
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double diag = p.omega0 - p.omega_p + potential(grid.x(i)) + p.g * std::norm(psi[i]);
        cplx r = cplx{diag, -0.5 * loss[i]} * psi[i] - p.kinetic * lap[i];
        if (!pump.empty()) r += pump[i];
        num += std::norm(r);
        den += std::norm(psi[i]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

/// Rate of change under one split step, ||S(psi) - psi|| / (dt ||psi||). This is
/// the right-hand side as actually integrated; it differs from
/// steady_state_residual by the O(dt^2) splitting error.
inline double scheme_residual(SplitStepper& stepper, std::span<const cplx> psi, std::span<const cplx> pump) {
    std::vector<cplx> next(psi.begin(), psi.end());
    stepper.step(next, pump);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        num += std::norm(next[i] - psi[i]);
        den += std::norm(psi[i]);
    }
    const double r = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    return r / stepper.grid().dt();
}

/// Time-dependent pump used during hysteresis preparation.
class PumpSchedule {
public:
    PumpSchedule(const Grid& grid, const CavityParams& params, const PumpProfile& pump,
                 const HysteresisOptions& hyst)
        : hyst_(hyst), field_(grid.size(), cplx{0.0, 0.0}) {
        for (std::size_t s = 0; s < pump.segments().size(); ++s) {
            std::vector<cplx> shape(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i) shape[i] = pump.segment_shape(s, grid.x(i));
            shapes_.push_back(std::move(shape));
            const auto& seg = pump.segments()[s];
            double boosted = seg.amplitude;
            if (hyst.enabled && seg.amplitude > 0.0) {
                if (auto tp = turning_points(effective_detuning(params, seg.k_p), params))
                    boosted = std::max(seg.amplitude, hyst.boost * tp->F1);
            }
            targets_.push_back(seg.amplitude);
            boosted_.push_back(boosted);
        }
        current_scale_.assign(targets_.size(), -1.0);
    }

    /// Pump field at time t (cached between calls with equal amplitudes).
    std::span<const cplx> at(double t) {
        bool changed = false;
        std::vector<double> amps(targets_.size());
        for (std::size_t s = 0; s < targets_.size(); ++s) {
            amps[s] = amplitude(s, t);
            changed |= amps[s] != current_scale_[s];
        }
        if (changed) {
            std::fill(field_.begin(), field_.end(), cplx{0.0, 0.0});
            for (std::size_t s = 0; s < amps.size(); ++s)
                for (std::size_t i = 0; i < field_.size(); ++i) field_[i] += amps[s] * shapes_[s][i];
            current_scale_ = amps;
        }
        return field_;
    }

    double amplitude(std::size_t s, double t) const {
        if (!hyst_.enabled || t >= hyst_.end()) return targets_[s];
        if (t < hyst_.hold) return boosted_[s];
        const double w = (t - hyst_.hold) / hyst_.ramp;
        return boosted_[s] + (targets_[s] - boosted_[s]) * w;
    }

private:
    HysteresisOptions hyst_;
    std::vector<std::vector<cplx>> shapes_;
    std::vector<double> targets_;
    std::vector<double> boosted_;
    std::vector<double> current_scale_;
    std::vector<cplx> field_;
};

/// Evolves until the relative change over one check interval drops below tol
/// or t_max is reached. Never throws NotConverged; see relax_to_steady.
inline MeanFieldSolution relax(const FieldState& initial, const CavityParams& params, const PumpProfile& pump,
                               const PotentialProfile& potential, double t_max, double tol,
                               const RelaxOptions& opt = {}) {
    if (!(t_max > 0.0) || !(tol > 0.0)) throw ConfigError("relax: t_max and tol must be > 0");
    const Grid& grid = initial.grid;
    grid.check_time_step(params.kinetic, opt.stability_safety);
    SplitStepper stepper(grid, params, potential, opt.absorber);
    PumpSchedule schedule(grid, params, pump, opt.hysteresis);

    std::vector<cplx> psi = initial.psi;
    std::vector<cplx> reference = psi;
    double t = initial.t;
    const double t_end = initial.t + t_max;
    const double settle = initial.t + opt.hysteresis.end();
    const auto steps_per_check =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opt.check_interval / grid.dt())));

    MeanFieldSolution sol;
    sol.grid = grid;
    double change = std::numeric_limits<double>::infinity();
    std::size_t step_count = 0;
    while (t < t_end) {
        stepper.step(psi, schedule.at(t));
        t = initial.t + static_cast<double>(++step_count) * grid.dt();
        if (step_count % steps_per_check != 0) continue;
        if (t - grid.dt() * static_cast<double>(steps_per_check) < settle) {
            reference = psi;
            continue;
        }
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < psi.size(); ++i) {
            num += std::norm(psi[i] - reference[i]);
            den += std::norm(psi[i]);
        }
        change = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
        reference = psi;
        if (change < tol) {
            sol.converged = true;
            break;
        }
    }
    sol.psi = std::move(psi);
    sol.t = t;
    sol.change = change;
    sol.residual = scheme_residual(stepper, sol.psi, schedule.at(t));
    sol.continuum_residual = steady_state_residual(stepper, sol.psi, schedule.at(t), potential);
    analyse(sol, params, pump, opt.absorber, opt.n_floor);
    return sol;
}

inline MeanFieldSolution relax_to_steady(const FieldState& initial, const CavityParams& params,
                                         const PumpProfile& pump, const PotentialProfile& potential,
                                         double t_max, double tol, const RelaxOptions& opt = {}) {
    auto sol = relax(initial, params, pump, potential, t_max, tol, opt);
    if (!sol.converged) {
        const double change = sol.change;
        const double residual = sol.residual;
        throw NotConverged(change, residual, std::make_shared<const MeanFieldSolution>(std::move(sol)));
    }
    return sol;
}

}  // namespace polariton
