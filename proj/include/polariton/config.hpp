// Simulation configuration and its sectioned key-value text format.
//
//   [cavity] [grid] [pump] [pump.0] [pump.1] ... [defect] [absorber]
//   [relax] [twa] [correlations] [sweep] [dispersion] [waterfall]
//
// Quantities are stored in internal units (um, ps, 1/ps). Floats are written
// with 17 significant digits, so parse -> serialize -> parse is the identity.
#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "polariton/bistability.hpp"
#include "polariton/core.hpp"
#include "polariton/correlations.hpp"
#include "polariton/dispersion.hpp"
#include "polariton/meanfield.hpp"
#include "polariton/twa.hpp"

namespace polariton {

struct GridSettings {
    double x_min = -100.0;
    double x_max = 220.0;
    std::size_t n_points = 2048;
    double dt = 0.0;  ///< [ps]; <= 0 selects the stability bound times the safety factor
    double stability_safety = 0.5;

    Grid make(const CavityParams& p) const {
        Grid g(x_min, x_max, n_points, 1.0);
        const double step = dt > 0.0 ? dt : g.max_stable_dt(p.kinetic, stability_safety);
        return g.with_dt(step);
    }
    bool operator==(const GridSettings&) const = default;
};

struct RelaxSettings {
    double t_max = 3000.0;
    double tol = 1e-8;
    double check_interval = 10.0;
    HysteresisOptions hysteresis;
    bool operator==(const RelaxSettings&) const = default;
};

struct TwaSettings {
    std::uint64_t realizations = 0;
    double burn_in = 0.0;
    double sample_interval = 0.0;
    std::uint64_t samples_per_realization = 1;
    std::uint64_t seed = 1;
    double decorrelation_floor = 0.0;
    std::size_t blocks = 64;
    std::size_t workers = 1;
    bool noise = true;
    bool wigner_offset = true;
    std::uint64_t checkpoint_every = 1000;
    bool operator==(const TwaSettings&) const = default;
};

struct CorrelationSettings {
    std::size_t decimation = 1;
    CorrelationOptions options;
    RegionGeometry regions;
    std::size_t bootstrap_resamples = 200;

    bool operator==(const CorrelationSettings& o) const {
        const auto& a = regions;
        const auto& b = o.regions;
        return decimation == o.decimation && options.g1_floor == o.options.g1_floor &&
               options.normalization == o.options.normalization && a.moustache.slope == b.moustache.slope &&
               a.moustache.half_width == b.moustache.half_width && a.moustache.offset == b.moustache.offset &&
               a.moustache.upstream_extent == b.moustache.upstream_extent && a.edge.x_edge == b.edge.x_edge &&
               a.edge.half_width == b.edge.half_width && a.edge.offset == b.edge.offset &&
               a.edge.extent == b.edge.extent && a.diagonal.half_width == b.diagonal.half_width &&
               a.diagonal.offset == b.diagonal.offset && a.diagonal.extent == b.diagonal.extent &&
               bootstrap_resamples == o.bootstrap_resamples;
    }
};

/// Homogeneous pump sweep for the bistability loop.
struct SweepSettings {
    double k_p = 0.25;
    double f_min = 0.0;
    double f_max = 12.0;
    std::size_t n_points = 400;
    bool operator==(const SweepSettings&) const = default;
};

/// Homogeneous region for dispersion tables and mode scans.
struct DispersionSettings {
    Region region = Region::pumped;
    double n = 0.0;         ///< density [1/um]; <= 0 selects the sonic point (pumped) or is an error
    double k_p = 0.25;      ///< pump wavevector (pumped)
    double v = 0.0;         ///< flow velocity (ballistic) [um/ps]
    double k_min = -3.0;
    double k_max = 3.0;
    std::size_t n_k = 601;
    bool operator==(const DispersionSettings&) const = default;
};

/// Pump wavevectors and downstream sound speed checked against the waterfall constraints.
struct WaterfallSettings {
    double k_up = 0.25;
    std::optional<double> k_down;
    std::optional<double> c_down;
    bool operator==(const WaterfallSettings&) const = default;
};

struct SimulationConfig {
    std::string name = "custom";
    CavityParams cavity = default_cavity_params();
    GridSettings grid;
    PumpProfile pump;
    PotentialProfile defect;
    Absorber absorber;
    RelaxSettings relax;
    TwaSettings twa;
    CorrelationSettings correlations;
    SweepSettings sweep;
    DispersionSettings dispersion;
    WaterfallSettings waterfall;

    Grid make_grid() const { return grid.make(cavity); }

    WaterfallParameters waterfall_parameters() const {
        return {cavity, waterfall.k_up, waterfall.k_down, waterfall.c_down};
    }

    RelaxOptions relax_options() const {
        RelaxOptions o;
        o.check_interval = relax.check_interval;
        o.hysteresis = relax.hysteresis;
        o.absorber = absorber;
        o.stability_safety = grid.stability_safety;
        return o;
    }

    TwaConfig twa_config() const {
        TwaConfig c;
        c.grid = make_grid();
        c.params = cavity;
        c.pump = pump;
        c.potential = defect;
        c.absorber = absorber;
        c.n_realizations = twa.realizations;
        c.burn_in = twa.burn_in;
        c.sample_interval = twa.sample_interval;
        c.samples_per_realization = twa.samples_per_realization;
        c.seed = twa.seed;
        c.decorrelation_floor = twa.decorrelation_floor;
        c.n_blocks = twa.blocks;
        c.workers = twa.workers;
        c.stability_safety = grid.stability_safety;
        c.stochastic = {twa.noise, twa.wigner_offset};
        c.relax_t_max = relax.t_max;
        c.relax_tol = relax.tol;
        c.hysteresis = relax.hysteresis;
        return c;
    }

    void validate() const {
        cavity.validate();
        const Grid g = make_grid();
        g.check_time_step(cavity.kinetic, grid.stability_safety);
        pump.validate();
        defect.validate();
        if (!(absorber.fraction >= 0.0 && absorber.fraction < 0.5))
            throw ConfigError("absorber: fraction must lie in [0, 0.5)");
        if (!(absorber.strength >= 0.0)) throw ConfigError("absorber: strength must be >= 0");
        if (!(relax.t_max > 0.0 && relax.tol > 0.0 && relax.check_interval > 0.0))
            throw ConfigError("relax: t_max, tol and check_interval must be > 0");
        if (correlations.decimation == 0 || grid.n_points % correlations.decimation != 0)
            throw ConfigError("correlations: decimation must divide grid.n_points");
        if (sweep.n_points < 2 || !(sweep.f_max > sweep.f_min) || sweep.f_min < 0.0)
            throw ConfigError("sweep: need n_points >= 2 and 0 <= f_min < f_max");
        if (dispersion.n_k < 2 || !(dispersion.k_max > dispersion.k_min))
            throw ConfigError("dispersion: need n_k >= 2 and k_min < k_max");
        twa_config().validate();
    }

    bool operator==(const SimulationConfig& o) const {
        return name == o.name && cavity == o.cavity && grid == o.grid && pump == o.pump && defect == o.defect &&
               absorber == o.absorber && relax == o.relax && twa == o.twa && correlations == o.correlations &&
               sweep == o.sweep && dispersion == o.dispersion && waterfall == o.waterfall;
    }
};

namespace config_detail {

using boost::property_tree::ptree;

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17e", v);
    return buf;
}
inline std::string fmt(std::uint64_t v) { return std::to_string(v); }
inline std::string fmt(bool v) { return v ? "true" : "false"; }

/// Reads keys of one section, rejecting anything not consumed.
class Section {
public:
    Section(std::string name, const ptree* tree) : name_(std::move(name)), tree_(tree) {}

    ~Section() noexcept(false) {
        if (!tree_ || std::uncaught_exceptions() > 0) return;
        for (const auto& [key, _] : *tree_)
            if (!used_.count(key)) throw ConfigError("unknown key '" + key + "' in [" + name_ + "]");
    }

    std::optional<std::string> raw(const std::string& key) {
        if (!tree_) return std::nullopt;
        auto it = tree_->find(key);
        if (it == tree_->not_found()) return std::nullopt;
        used_.insert(key);
        return it->second.data();
    }

    void get(const std::string& key, double& out) {
        if (auto s = raw(key)) {
            try {
                std::size_t pos = 0;
                out = std::stod(*s, &pos);
                if (pos != s->size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw ConfigError("[" + name_ + "] " + key + ": not a number: '" + *s + "'");
            }
        }
    }

    template <typename Int>
        requires std::is_integral_v<Int> && (!std::is_same_v<Int, bool>)
    void get(const std::string& key, Int& out) {
        if (auto s = raw(key)) {
            try {
                std::size_t pos = 0;
                const unsigned long long v = std::stoull(*s, &pos);
                if (pos != s->size() || (!s->empty() && (*s)[0] == '-')) throw std::invalid_argument("bad");
                out = static_cast<Int>(v);
            } catch (const std::exception&) {
                throw ConfigError("[" + name_ + "] " + key + ": not a non-negative integer: '" + *s + "'");
            }
        }
    }

    void get(const std::string& key, bool& out) {
        if (auto s = raw(key)) {
            if (*s == "true" || *s == "1") out = true;
            else if (*s == "false" || *s == "0") out = false;
            else throw ConfigError("[" + name_ + "] " + key + ": expected true/false");
        }
    }

    void get(const std::string& key, std::string& out) {
        if (auto s = raw(key)) out = *s;
    }

private:
    std::string name_;
    const ptree* tree_;
    std::set<std::string> used_;
};

}  // namespace config_detail

/// Parses the sectioned text format. Missing keys keep their defaults; unknown
/// sections or keys are errors. Energies may be given in meV via the *_meV keys.
inline SimulationConfig parse_config(const std::string& text) {
    using config_detail::ptree;
    using config_detail::Section;
    ptree root;
    try {
        std::istringstream in(text);
        boost::property_tree::ini_parser::read_ini(in, root);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }

    std::map<std::string, const ptree*> sections;
    for (const auto& [name, tree] : root) {
        if (tree.empty() && !tree.data().empty())
            throw ConfigError("config: key '" + name + "' outside of any section");
        sections[name] = &tree;
    }
    auto section = [&](const std::string& name) {
        auto it = sections.find(name);
        return Section(name, it == sections.end() ? nullptr : it->second);
    };

    SimulationConfig c;
    std::set<std::string> known = {"general",      "cavity", "grid",  "pump",  "defect",     "absorber", "relax",
                                   "twa",          "correlations", "sweep", "dispersion", "waterfall"};
    {
        auto s = section("general");
        s.get("name", c.name);
    }
    {
        auto s = section("cavity");
        s.get("gamma", c.cavity.gamma);
        s.get("g", c.cavity.g);
        s.get("kinetic", c.cavity.kinetic);
        s.get("omega0", c.cavity.omega0);
        s.get("omega_p", c.cavity.omega_p);
        double v = 0.0;
        if (s.raw("gamma_meV")) { s.get("gamma_meV", v); c.cavity.gamma = mev_to_angfreq(v); }
        if (s.raw("g_meV_um")) { s.get("g_meV_um", v); c.cavity.g = mev_to_angfreq(v); }
        if (s.raw("mass_me")) { s.get("mass_me", v); c.cavity.kinetic = kinetic_coefficient(v); }
        if (s.raw("omega0_meV")) { s.get("omega0_meV", v); c.cavity.omega0 = mev_to_angfreq(v); }
        if (s.raw("omega_p_meV")) { s.get("omega_p_meV", v); c.cavity.omega_p = mev_to_angfreq(v); }
    }
    {
        auto s = section("grid");
        s.get("x_min", c.grid.x_min);
        s.get("x_max", c.grid.x_max);
        s.get("n_points", c.grid.n_points);
        s.get("dt", c.grid.dt);
        s.get("stability_safety", c.grid.stability_safety);
    }
    double smoothing = 0.0;
    {
        auto s = section("pump");
        s.get("smoothing", smoothing);
    }
    std::vector<PumpSegment> segments;
    for (std::size_t i = 0;; ++i) {
        const std::string name = "pump." + std::to_string(i);
        if (!sections.count(name)) break;
        known.insert(name);
        auto s = section(name);
        PumpSegment seg;
        s.get("x_start", seg.x_start);
        s.get("x_end", seg.x_end);
        s.get("amplitude", seg.amplitude);
        s.get("k_p", seg.k_p);
        segments.push_back(seg);
    }
    c.pump = PumpProfile(segments, smoothing);
    {
        auto s = section("defect");
        std::string kind = "none";
        s.get("kind", kind);
        if (kind == "none") c.defect.kind = PotentialKind::none;
        else if (kind == "gaussian") c.defect.kind = PotentialKind::gaussian_defect;
        else throw ConfigError("[defect] kind must be none or gaussian");
        s.get("center", c.defect.center);
        s.get("depth", c.defect.depth);
        double v = 0.0;
        if (s.raw("depth_meV")) { s.get("depth_meV", v); c.defect.depth = mev_to_angfreq(v); }
        s.get("width", c.defect.width);
    }
    {
        auto s = section("absorber");
        s.get("fraction", c.absorber.fraction);
        s.get("strength", c.absorber.strength);
    }
    {
        auto s = section("relax");
        s.get("t_max", c.relax.t_max);
        s.get("tol", c.relax.tol);
        s.get("check_interval", c.relax.check_interval);
        s.get("hysteresis", c.relax.hysteresis.enabled);
        s.get("boost", c.relax.hysteresis.boost);
        s.get("hold", c.relax.hysteresis.hold);
        s.get("ramp", c.relax.hysteresis.ramp);
    }
    {
        auto s = section("twa");
        s.get("realizations", c.twa.realizations);
        s.get("burn_in", c.twa.burn_in);
        s.get("sample_interval", c.twa.sample_interval);
        s.get("samples_per_realization", c.twa.samples_per_realization);
        s.get("seed", c.twa.seed);
        s.get("decorrelation_floor", c.twa.decorrelation_floor);
        s.get("blocks", c.twa.blocks);
        s.get("workers", c.twa.workers);
        s.get("noise", c.twa.noise);
        s.get("wigner_offset", c.twa.wigner_offset);
        s.get("checkpoint_every", c.twa.checkpoint_every);
    }
    {
        auto s = section("correlations");
        auto& k = c.correlations;
        s.get("decimation", k.decimation);
        s.get("g1_floor", k.options.g1_floor);
        std::string norm = "g1";
        s.get("normalization", norm);
        if (norm == "g1") k.options.normalization = G2Normalization::g1;
        else if (norm == "density") k.options.normalization = G2Normalization::density;
        else throw ConfigError("[correlations] normalization must be g1 or density");
        s.get("moustache_slope", k.regions.moustache.slope);
        s.get("moustache_half_width", k.regions.moustache.half_width);
        s.get("moustache_offset", k.regions.moustache.offset);
        s.get("moustache_extent", k.regions.moustache.upstream_extent);
        s.get("edge_x", k.regions.edge.x_edge);
        s.get("edge_half_width", k.regions.edge.half_width);
        s.get("edge_offset", k.regions.edge.offset);
        s.get("edge_extent", k.regions.edge.extent);
        s.get("diagonal_half_width", k.regions.diagonal.half_width);
        s.get("diagonal_offset", k.regions.diagonal.offset);
        s.get("diagonal_extent", k.regions.diagonal.extent);
        s.get("bootstrap_resamples", k.bootstrap_resamples);
    }
    {
        auto s = section("sweep");
        s.get("k_p", c.sweep.k_p);
        s.get("f_min", c.sweep.f_min);
        s.get("f_max", c.sweep.f_max);
        s.get("n_points", c.sweep.n_points);
    }
    {
        auto s = section("dispersion");
        std::string region = "pumped";
        s.get("region", region);
        if (region == "pumped") c.dispersion.region = Region::pumped;
        else if (region == "ballistic") c.dispersion.region = Region::ballistic;
        else throw ConfigError("[dispersion] region must be pumped or ballistic");
        s.get("n", c.dispersion.n);
        s.get("k_p", c.dispersion.k_p);
        s.get("v", c.dispersion.v);
        s.get("k_min", c.dispersion.k_min);
        s.get("k_max", c.dispersion.k_max);
        s.get("n_k", c.dispersion.n_k);
    }
    {
        auto s = section("waterfall");
        s.get("k_up", c.waterfall.k_up);
        double v = 0.0;
        if (s.raw("k_down")) { s.get("k_down", v); c.waterfall.k_down = v; }
        if (s.raw("c_down")) { s.get("c_down", v); c.waterfall.c_down = v; }
    }
    for (const auto& [name, _] : sections)
        if (!known.count(name)) throw ConfigError("unknown section [" + name + "]");
    c.validate();
    return c;
}

inline SimulationConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// Canonical text form; every field is written.
inline std::string serialize_config(const SimulationConfig& c) {
    using config_detail::fmt;
    std::ostringstream o;
    auto kv = [&](const char* k, const std::string& v) { o << k << " = " << v << "\n"; };
    o << "[general]\n";
    kv("name", c.name);
    o << "\n[cavity]\n";
    kv("gamma", fmt(c.cavity.gamma));
    kv("g", fmt(c.cavity.g));
    kv("kinetic", fmt(c.cavity.kinetic));
    kv("omega0", fmt(c.cavity.omega0));
    kv("omega_p", fmt(c.cavity.omega_p));
    o << "\n[grid]\n";
    kv("x_min", fmt(c.grid.x_min));
    kv("x_max", fmt(c.grid.x_max));
    kv("n_points", fmt(static_cast<std::uint64_t>(c.grid.n_points)));
    kv("dt", fmt(c.grid.dt));
    kv("stability_safety", fmt(c.grid.stability_safety));
    o << "\n[pump]\n";
    kv("smoothing", fmt(c.pump.smoothing()));
    for (std::size_t i = 0; i < c.pump.segments().size(); ++i) {
        const auto& s = c.pump.segments()[i];
        o << "\n[pump." << i << "]\n";
        kv("x_start", fmt(s.x_start));
        kv("x_end", fmt(s.x_end));
        kv("amplitude", fmt(s.amplitude));
        kv("k_p", fmt(s.k_p));
    }
    o << "\n[defect]\n";
    kv("kind", c.defect.kind == PotentialKind::none ? "none" : "gaussian");
    kv("center", fmt(c.defect.center));
    kv("depth", fmt(c.defect.depth));
    kv("width", fmt(c.defect.width));
    o << "\n[absorber]\n";
    kv("fraction", fmt(c.absorber.fraction));
    kv("strength", fmt(c.absorber.strength));
    o << "\n[relax]\n";
    kv("t_max", fmt(c.relax.t_max));
    kv("tol", fmt(c.relax.tol));
    kv("check_interval", fmt(c.relax.check_interval));
    kv("hysteresis", fmt(c.relax.hysteresis.enabled));
    kv("boost", fmt(c.relax.hysteresis.boost));
    kv("hold", fmt(c.relax.hysteresis.hold));
    kv("ramp", fmt(c.relax.hysteresis.ramp));
    o << "\n[twa]\n";
    kv("realizations", fmt(c.twa.realizations));
    kv("burn_in", fmt(c.twa.burn_in));
    kv("sample_interval", fmt(c.twa.sample_interval));
    kv("samples_per_realization", fmt(c.twa.samples_per_realization));
    kv("seed", fmt(c.twa.seed));
    kv("decorrelation_floor", fmt(c.twa.decorrelation_floor));
    kv("blocks", fmt(static_cast<std::uint64_t>(c.twa.blocks)));
    kv("workers", fmt(static_cast<std::uint64_t>(c.twa.workers)));
    kv("noise", fmt(c.twa.noise));
    kv("wigner_offset", fmt(c.twa.wigner_offset));
    kv("checkpoint_every", fmt(c.twa.checkpoint_every));
    o << "\n[correlations]\n";
    const auto& k = c.correlations;
    kv("decimation", fmt(static_cast<std::uint64_t>(k.decimation)));
    kv("g1_floor", fmt(k.options.g1_floor));
    kv("normalization", k.options.normalization == G2Normalization::g1 ? "g1" : "density");
    kv("moustache_slope", fmt(k.regions.moustache.slope));
    kv("moustache_half_width", fmt(k.regions.moustache.half_width));
    kv("moustache_offset", fmt(k.regions.moustache.offset));
    kv("moustache_extent", fmt(k.regions.moustache.upstream_extent));
    kv("edge_x", fmt(k.regions.edge.x_edge));
    kv("edge_half_width", fmt(k.regions.edge.half_width));
    kv("edge_offset", fmt(k.regions.edge.offset));
    kv("edge_extent", fmt(k.regions.edge.extent));
    kv("diagonal_half_width", fmt(k.regions.diagonal.half_width));
    kv("diagonal_offset", fmt(k.regions.diagonal.offset));
    kv("diagonal_extent", fmt(k.regions.diagonal.extent));
    kv("bootstrap_resamples", fmt(static_cast<std::uint64_t>(k.bootstrap_resamples)));
    o << "\n[sweep]\n";
    kv("k_p", fmt(c.sweep.k_p));
    kv("f_min", fmt(c.sweep.f_min));
    kv("f_max", fmt(c.sweep.f_max));
    kv("n_points", fmt(static_cast<std::uint64_t>(c.sweep.n_points)));
    o << "\n[dispersion]\n";
    kv("region", c.dispersion.region == Region::pumped ? "pumped" : "ballistic");
    kv("n", fmt(c.dispersion.n));
    kv("k_p", fmt(c.dispersion.k_p));
    kv("v", fmt(c.dispersion.v));
    kv("k_min", fmt(c.dispersion.k_min));
    kv("k_max", fmt(c.dispersion.k_max));
    kv("n_k", fmt(static_cast<std::uint64_t>(c.dispersion.n_k)));
    o << "\n[waterfall]\n";
    kv("k_up", fmt(c.waterfall.k_up));
    if (c.waterfall.k_down) kv("k_down", fmt(*c.waterfall.k_down));
    if (c.waterfall.c_down) kv("c_down", fmt(*c.waterfall.c_down));
    return o.str();
}

/// FNV-1a over the canonical text.
inline std::uint64_t config_hash(const SimulationConfig& c) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : serialize_config(c)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace polariton
