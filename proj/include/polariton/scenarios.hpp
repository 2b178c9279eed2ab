// Named waterfall configurations.
//
// Every preset shares the cavity, the upstream pump (9 at k = 0.25 up to
// x = -20) and a Gaussian defect of 0.85 meV at x = 0. They differ in the
// second pump step on [-20, -7], in an optional downstream pump and in the
// sign of the defect.
#pragma once

#include <string>
#include <vector>

#include "polariton/bistability.hpp"
#include "polariton/config.hpp"

namespace polariton {

struct UnknownScenario : ConfigError {
    explicit UnknownScenario(const std::string& name) : ConfigError("unknown scenario '" + name + "'"), name(name) {}
    std::string name;
};

struct Domain {
    double x_min = -100.0;
    double x_max = 220.0;
    std::size_t n_points = 2048;
    double stability_safety = 0.5;
};

/// Reduced box used for runs that must finish on a single core.
inline Domain desk_domain() { return {-48.0, 80.0, 256, 1.0}; }

/// Upstream working points of the ladder, as multiples of the sonic-point amplitude.
struct ScenarioLadder {
    double fig3c = 1.5;
    double fig3d = 1.2;
};

inline constexpr double upstream_amplitude = 9.0;
inline constexpr double upstream_wavevector = 0.25;
inline constexpr double second_step_start = -20.0;
inline constexpr double second_step_end = -7.0;
inline constexpr double fig3e_second_step = 1.2;
inline constexpr double defect_depth_mev = 0.85;
inline constexpr double defect_width = 0.5;

inline const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = {"fig1", "fig3a", "fig3b", "fig3c", "fig3d", "fig3e",
                                                   "appendixD_repulsive"};
    return names;
}

/// Amplitude at the sonic point for pump wavevector k.
inline double sonic_amplitude(const CavityParams& p, double k) { return sonic_point(effective_detuning(p, k), p).F; }

namespace scenario_detail {

inline SimulationConfig base(const std::string& name, const Domain& d, double second_step) {
    SimulationConfig c;
    c.name = name;
    c.grid.x_min = d.x_min;
    c.grid.x_max = d.x_max;
    c.grid.n_points = d.n_points;
    c.grid.dt = 0.0;
    c.grid.stability_safety = d.stability_safety;
    const double pump_start = d.x_min + 2.0 * c.absorber.fraction * (d.x_max - d.x_min);
    c.pump = PumpProfile({{pump_start, second_step_start, upstream_amplitude, upstream_wavevector},
                          {second_step_start, second_step_end, second_step, upstream_wavevector}},
                         0.0);
    c.defect = PotentialProfile::gaussian(0.0, -mev_to_angfreq(defect_depth_mev), defect_width);
    c.twa.realizations = 500;
    c.twa.samples_per_realization = 100;
    c.twa.seed = 1;
    c.sweep.k_p = upstream_wavevector;
    c.dispersion.k_p = upstream_wavevector;
    c.waterfall.k_up = upstream_wavevector;
    return c;
}

/// Adds a pump at k_down from just past the defect to the right absorber.
inline void add_downstream_pump(SimulationConfig& c, double k_down, double ratio) {
    auto segs = c.pump.segments();
    const double end = c.grid.x_max - c.absorber.fraction * (c.grid.x_max - c.grid.x_min);
    segs.push_back({1.0, end, ratio * sonic_amplitude(c.cavity, k_down), k_down});
    c.pump = PumpProfile(segs, c.pump.smoothing());
    c.waterfall.k_down = k_down;
}

}  // namespace scenario_detail

/// Builds a named preset on the given domain. Throws UnknownScenario.
inline SimulationConfig load_scenario(const std::string& name, const Domain& domain = {},
                                      const ScenarioLadder& ladder = {}) {
    using namespace scenario_detail;
    const CavityParams p = default_cavity_params();
    const double f_c = sonic_amplitude(p, upstream_wavevector);
    SimulationConfig c;
    if (name == "fig1" || name == "fig3e") {
        c = base(name, domain, fig3e_second_step);
    } else if (name == "fig3d") {
        c = base(name, domain, ladder.fig3d * f_c);
    } else if (name == "fig3c") {
        c = base(name, domain, ladder.fig3c * f_c);
    } else if (name == "fig3a") {
        c = base(name, domain, fig3e_second_step);
        add_downstream_pump(c, 0.55, 1.1);
    } else if (name == "fig3b") {
        c = base(name, domain, fig3e_second_step);
        add_downstream_pump(c, 0.58, 1.5);
    } else if (name == "appendixD_repulsive") {
        c = base(name, domain, fig3e_second_step);
        c.defect.depth = mev_to_angfreq(defect_depth_mev);
    } else {
        throw UnknownScenario(name);
    }
    c.validate();
    return c;
}

}  // namespace polariton
