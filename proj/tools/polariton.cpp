// Command-line driver: bistability, dispersion, steady, twa, validate.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "polariton/bistability.hpp"
#include "polariton/config.hpp"
#include "polariton/dispersion.hpp"
#include "polariton/io.hpp"
#include "polariton/meanfield.hpp"
#include "polariton/scenarios.hpp"
#include "polariton/twa.hpp"

namespace fs = std::filesystem;
using namespace polariton;

namespace {

enum Exit { ok = 0, config_error = 2, numerical_failure = 3, constraint_violation = 4 };

struct Common {
    std::string config;
    std::string scenario;
    bool desk = false;
    std::string output;
    std::string format = "bin";
};

SimulationConfig load(const Common& c) {
    if (!c.config.empty() && !c.scenario.empty()) throw ConfigError("give either --config or --scenario, not both");
    if (!c.config.empty()) return load_config(c.config);
    const Domain domain = c.desk ? desk_domain() : Domain{};
    return load_scenario(c.scenario.empty() ? "fig3e" : c.scenario, domain);
}

fs::path output_or(const Common& c, const std::string& fallback) {
    return c.output.empty() ? fs::path(fallback) : fs::path(c.output);
}

fs::path sibling(const fs::path& p, const std::string& suffix) {
    return p.parent_path() / (p.stem().string() + suffix);
}

void add_common(CLI::App* app, Common& c, bool with_format) {
    app->add_option("--config", c.config, "configuration file");
    app->add_option("--scenario", c.scenario, "named preset (used when no --config is given)");
    app->add_flag("--desk-scale", c.desk, "build the preset on the reduced single-core box");
    app->add_option("--output", c.output, "output path");
    if (with_format) app->add_option("--format", c.format, "bin or csv")->check(CLI::IsMember({"bin", "csv"}));
}

int cmd_bistability(const Common& opt) {
    const auto cfg = load(opt);
    const auto& s = cfg.sweep;
    const double delta = effective_detuning(cfg.cavity, s.k_p);
    std::vector<double> amps(s.n_points);
    for (std::size_t i = 0; i < s.n_points; ++i)
        amps[i] = s.f_min + (s.f_max - s.f_min) * static_cast<double>(i) / static_cast<double>(s.n_points - 1);
    const auto up = hysteresis_sweep(delta, cfg.cavity, amps, SweepDirection::up);
    const auto down = hysteresis_sweep(delta, cfg.cavity, amps, SweepDirection::down);
    const auto out = output_or(opt, "bistability.csv");
    io::atomic_write(out, io::bistability_csv(up, down));

    double n_max = 0.0;
    for (const auto& c : down) n_max = std::max(n_max, c.n);
    const auto curve = bistability_curve(delta, cfg.cavity, n_max, s.n_points);
    io::atomic_write(sibling(out, "_curve.csv"), io::curve_csv(curve));

    std::printf("delta_p = %.10g\n", delta);
    if (curve.F1) std::printf("F1 = %.10g\nF2 = %.10g\n", *curve.F1, *curve.F2);
    else std::printf("single-valued response (delta_p <= gamma*sqrt(3)/2)\n");
    return ok;
}

int cmd_dispersion(const Common& opt) {
    const auto cfg = load(opt);
    const auto& d = cfg.dispersion;
    BranchParams b;
    if (d.region == Region::pumped) {
        b = d.n > 0.0 ? BranchParams::pumped(cfg.cavity, d.n, d.k_p) : BranchParams::sonic(cfg.cavity, d.k_p);
    } else {
        if (!(d.n > 0.0)) throw ConfigError("[dispersion] ballistic region needs n > 0");
        b = BranchParams::ballistic(cfg.cavity, d.n, d.v);
    }
    b.validate();
    const auto out = output_or(opt, "dispersion.csv");
    io::atomic_write(out, io::dispersion_csv(b, d.k_min, d.k_max, d.n_k));

    std::vector<io::DispersionMarker> markers;
    const auto lo = lower_band_edge(b);
    markers.push_back({"omega_min", lo.omega, lo.k});
    if (std::abs(b.v) > b.sound_speed()) {
        const auto hi = upper_band_edge(b);
        markers.push_back({"omega_max", hi.omega, hi.k});
    }
    io::atomic_write(sibling(out, "_markers.csv"), io::markers_csv(markers));
    std::printf("region = %s  n = %.10g  v = %.10g  c_B = %.10g\n", to_string(b.region), b.n, b.v, b.sound_speed());
    for (const auto& m : markers) std::printf("%s = %.10g at k = %.10g\n", m.name.c_str(), m.omega, m.k);
    return ok;
}

int cmd_steady(const Common& opt) {
    const auto cfg = load(opt);
    const Grid grid = cfg.make_grid();
    const auto sol = relax_to_steady(FieldState(grid), cfg.cavity, cfg.pump, cfg.defect, cfg.relax.t_max,
                                     cfg.relax.tol, cfg.relax_options());
    const auto profile = io::flow_profile(sol);
    if (opt.format == "csv") {
        const auto out = output_or(opt, "steady.csv");
        io::atomic_write(out, io::flow_csv(profile));
        io::atomic_write(sibling(out, "_horizons.csv"), io::horizons_csv(profile.horizons));
    } else {
        io::write_flow(output_or(opt, "steady.flow1"), profile);
    }
    std::printf("t = %.6g ps  residual = %.3e  change = %.3e\n", sol.t, sol.residual, sol.change);
    for (const auto& h : sol.horizons) std::printf("horizon %s at x = %.6g um\n", to_string(h.type), h.x);
    return ok;
}

struct TwaFlags {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> realizations;
    std::optional<std::size_t> workers;
    std::string resume;
};

int cmd_twa(const Common& opt, const TwaFlags& flags) {
    auto cfg = load(opt);
    if (flags.seed) cfg.twa.seed = *flags.seed;
    if (flags.realizations) cfg.twa.realizations = *flags.realizations;
    if (flags.workers) cfg.twa.workers = *flags.workers;
    cfg.validate();
    // Worker count does not change results, so it is left out of the hash.
    auto hashed = cfg;
    hashed.twa.workers = 1;
    const std::uint64_t hash = config_hash(hashed);

    const TwaConfig tc = cfg.twa_config();
    const auto mf = prepare_initial_state(tc);
    const auto horizon = mf.black_hole_horizon();
    std::fprintf(stderr, "mean field: t = %.6g ps, residual = %.3e, horizon = %s\n", mf.t, mf.residual,
                 horizon ? std::to_string(*horizon).c_str() : "none");

    BlockedAccumulator acc(tc.grid, tc.n_blocks, cfg.correlations.decimation);
    EnsembleOptions eo;
    eo.config_hash = hash;
    eo.checkpoint_every = cfg.twa.checkpoint_every;
    if (!flags.resume.empty()) {
        eo.checkpoint = fs::path(flags.resume);
        if (fs::exists(*eo.checkpoint)) {
            load_checkpoint(*eo.checkpoint, acc, hash);
            std::fprintf(stderr, "resumed at realization %llu\n",
                         static_cast<unsigned long long>(acc.next_realization));
        }
    }
    eo.progress = [](std::uint64_t done, std::uint64_t total) {
        if (done == total || done % 50 == 0)
            std::fprintf(stderr, "\r%llu / %llu", static_cast<unsigned long long>(done),
                         static_cast<unsigned long long>(total));
        if (done == total) std::fprintf(stderr, "\n");
    };
    const auto report = run_ensemble(tc, acc, mf.psi, eo);
    for (const auto& s : report.status)
        if (!s.ok) std::fprintf(stderr, "warning: %s\n", s.error.c_str());

    const auto map = g2_map(acc.pooled(), cfg.correlations.options);
    std::vector<std::string> outputs;
    const auto out = output_or(opt, opt.format == "csv" ? "twa.csv" : "twa.cmap1");
    if (opt.format == "csv") {
        io::atomic_write(out, io::g2_csv(map));
        io::atomic_write(sibling(out, "_g1.csv"), io::g1_csv(map));
        outputs.push_back(out.string());
        outputs.push_back(sibling(out, "_g1.csv").string());
    } else {
        io::write_cmap(out, map);
        outputs.push_back(out.string());
    }
    if (horizon) {
        const auto& k = cfg.correlations;
        const auto stats = region_statistics(acc.blocks, *horizon, k.regions, k.options, k.bootstrap_resamples);
        const auto stats_path = sibling(out, "_stats.csv");
        io::atomic_write(stats_path, io::statistics_csv(stats));
        outputs.push_back(stats_path.string());
        std::printf("moustache = %+.4e +- %.4e (%.2f sigma)\n", stats.moustache.value, stats.moustache.se,
                    stats.moustache.significance());
    }

    io::RunManifest m;
    m.command = "twa";
    m.config_hash = hash;
    m.seed = cfg.twa.seed;
    m.wall_seconds = report.wall_seconds;
    m.realizations = acc.next_realization - acc.failed;
    m.samples = map.n_samples;
    m.outputs = outputs;
    m.timestamp = io::utc_timestamp();
    io::write_manifest(sibling(out, "_manifest.json"), m);
    io::atomic_write(sibling(out, "_config.ini"), serialize_config(cfg));
    std::printf("samples = %llu  failed = %llu  wall = %.1f s\n", static_cast<unsigned long long>(map.n_samples),
                static_cast<unsigned long long>(acc.failed), report.wall_seconds);
    return ok;
}

int cmd_validate(const Common& opt) {
    const auto cfg = load(opt);
    const auto violations = validate_waterfall_config(cfg.waterfall_parameters());
    std::printf("k_up bound = %.6g 1/um\n", upstream_wavevector_bound(cfg.cavity));
    std::printf("k_down bound = %.6g 1/um\n", downstream_wavevector_bound(cfg.cavity));
    for (const auto& v : violations)
        std::printf("violation %s: %.6g <= %.6g (%s)\n", to_string(v.constraint), v.value, v.bound, v.message.c_str());
    if (violations.empty()) std::printf("all constraints satisfied\n");
    return violations.empty() ? ok : constraint_violation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Driven-dissipative polariton fluid simulations"};
    app.require_subcommand(1);
    Common common;
    TwaFlags twa;

    auto* bist = app.add_subcommand("bistability", "homogeneous bistability loop (CSV)");
    add_common(bist, common, false);
    auto* disp = app.add_subcommand("dispersion", "Bogoliubov branches and band markers (CSV)");
    add_common(disp, common, false);
    auto* steady = app.add_subcommand("steady", "relax to the mean-field steady state (FLOW1 or CSV)");
    add_common(steady, common, true);
    auto* tw = app.add_subcommand("twa", "truncated Wigner ensemble (CMAP1 or CSV, plus manifest)");
    add_common(tw, common, true);
    tw->add_option("--seed", twa.seed, "random seed");
    tw->add_option("--realizations", twa.realizations, "number of realizations");
    tw->add_option("--workers", twa.workers, "worker threads")->check(CLI::PositiveNumber);
    tw->add_option("--resume", twa.resume, "checkpoint file, loaded if present and updated while running");
    auto* val = app.add_subcommand("validate", "check the waterfall constraints");
    add_common(val, common, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (bist->parsed()) return cmd_bistability(common);
        if (disp->parsed()) return cmd_dispersion(common);
        if (steady->parsed()) return cmd_steady(common);
        if (tw->parsed()) return cmd_twa(common, twa);
        if (val->parsed()) return cmd_validate(common);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return config_error;
    } catch (const NotConverged& e) {
        std::fprintf(stderr, "not converged: %s\n", e.what());
        return numerical_failure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return numerical_failure;
    }
    return ok;
}
