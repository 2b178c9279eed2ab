#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "polariton/config.hpp"
#include "polariton/scenarios.hpp"

using namespace polariton;

namespace {

const char* minimal = R"ini(
[general]
name = minimal

[cavity]
gamma_meV = 0.047
g_meV_um = 0.0003
mass_me = 3e-5
omega0_meV = 0
omega_p_meV = 0.49

[grid]
x_min = -40
x_max = 40
n_points = 256

[pump]
smoothing = 0.5

[pump.0]
x_start = -30
x_end = -7
amplitude = 9
k_p = 0.25

[defect]
kind = gaussian
center = 0
depth_meV = -0.85
width = 0.5
)ini";

TEST(Config, ParsesMeVAliasesIntoAngularFrequencies) {
    const auto c = parse_config(minimal);
    const auto ref = default_cavity_params();
    EXPECT_EQ(c.name, "minimal");
    EXPECT_NEAR(c.cavity.gamma, ref.gamma, 1e-15);
    EXPECT_NEAR(c.cavity.g, ref.g, 1e-18);
    EXPECT_NEAR(c.cavity.kinetic, ref.kinetic, 1e-12);
    EXPECT_NEAR(c.cavity.omega_p, ref.omega_p, 1e-12);
    EXPECT_NEAR(c.defect.depth, -mev_to_angfreq(0.85), 1e-12);
    ASSERT_EQ(c.pump.segments().size(), 1u);
    EXPECT_EQ(c.pump.segments()[0].amplitude, 9.0);
    EXPECT_EQ(c.pump.smoothing(), 0.5);
}

TEST(Config, DefaultsFillMissingSections) {
    const auto c = parse_config("[general]\nname = empty\n");
    const SimulationConfig d;
    EXPECT_EQ(c.grid.n_points, d.grid.n_points);
    EXPECT_EQ(c.absorber, d.absorber);
    EXPECT_EQ(c.cavity, d.cavity);
}

TEST(Config, AutomaticTimeStepUsesStabilityBound) {
    auto c = parse_config(minimal);
    const Grid g = c.make_grid();
    EXPECT_NEAR(g.dt(), g.max_stable_dt(c.cavity.kinetic, c.grid.stability_safety), 1e-15);
    c.grid.dt = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, RejectsUnknownKeysAndSections) {
    EXPECT_THROW(parse_config("[cavity]\ngamma = 0.1\ngamme = 0.2\n"), ConfigError);
    EXPECT_THROW(parse_config("[cavitty]\ngamma = 0.1\n"), ConfigError);
    EXPECT_THROW(parse_config("name = top\n"), ConfigError);
    EXPECT_THROW(parse_config("[grid]\nn_points = many\n"), ConfigError);
    EXPECT_THROW(parse_config("[grid\n"), ConfigError);
}

TEST(Config, RejectsDuplicateSection) {
    EXPECT_THROW(parse_config("[grid]\nx_min = 0\n[grid]\nx_max = 1\n"), ConfigError);
}

TEST(Config, ValidationCatchesBadValues) {
    auto c = parse_config(minimal);
    c.grid.n_points = 300;
    EXPECT_THROW(c.validate(), ConfigError);
    c = parse_config(minimal);
    c.cavity.gamma = -1.0;
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_THROW(parse_config(std::string(minimal) + "[pump.1]\nx_start = -10\nx_end = 0\namplitude = 1\nk_p = 0.25\n"),
                 ConfigError);
}

TEST(Config, SerializeRoundTripIsExact) {
    auto c = parse_config(minimal);
    c.twa.seed = 0xdeadbeefcafeULL;
    c.correlations.regions.moustache.slope = 2.5;
    c.waterfall.k_down = 0.55;
    const std::string text = serialize_config(c);
    const auto back = parse_config(text);
    EXPECT_TRUE(back == c);
    EXPECT_EQ(serialize_config(back), text);
    EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(Config, HashTracksContent) {
    const auto a = parse_config(minimal);
    auto b = a;
    b.twa.seed += 1;
    EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, LoadFromFile) {
    const auto path = std::filesystem::temp_directory_path() / "polariton_test_config.ini";
    {
        std::ofstream out(path);
        out << minimal;
    }
    EXPECT_TRUE(load_config(path.string()) == parse_config(minimal));
    std::filesystem::remove(path);
    EXPECT_THROW(load_config(path.string()), ConfigError);
}

TEST(Scenarios, EveryPresetRoundTripsThroughText) {
    for (const auto& name : scenario_names()) {
        const auto c = load_scenario(name, desk_domain());
        EXPECT_EQ(c.name, name);
        EXPECT_TRUE(parse_config(serialize_config(c)) == c) << name;
    }
}

TEST(Scenarios, UnknownNameThrows) {
    EXPECT_THROW(load_scenario("fig9"), UnknownScenario);
    try {
        load_scenario("fig9");
    } catch (const UnknownScenario& e) {
        EXPECT_EQ(e.name, "fig9");
    }
}

TEST(Scenarios, Fig3eHasTwoStepPumpAndNoDownstreamPump) {
    const auto c = load_scenario("fig3e");
    const auto& segs = c.pump.segments();
    ASSERT_EQ(segs.size(), 2u);
    for (const auto& s : segs) {
        EXPECT_EQ(s.k_p, 0.25);
        EXPECT_LE(s.x_end, -7.0);
    }
    EXPECT_EQ(segs[0].amplitude, 9.0);
    EXPECT_EQ(segs[1].x_end, -7.0);
    EXPECT_EQ(c.pump(10.0), cplx(0.0, 0.0));
    EXPECT_LT(c.defect.depth, 0.0);
    EXPECT_FALSE(c.waterfall.k_down);
    EXPECT_EQ(c.grid.n_points, 2048u);
    EXPECT_TRUE(validate_waterfall_config(c.waterfall_parameters()).empty());
}

TEST(Scenarios, Fig1MatchesFig3eApartFromName) {
    auto a = load_scenario("fig1");
    a.name = "fig3e";
    EXPECT_TRUE(a == load_scenario("fig3e"));
}

TEST(Scenarios, DownstreamPumpedPresets) {
    const auto a = load_scenario("fig3a");
    ASSERT_EQ(a.pump.segments().size(), 3u);
    EXPECT_EQ(a.pump.segments()[2].k_p, 0.55);
    EXPECT_EQ(a.waterfall.k_down, 0.55);
    EXPECT_GT(a.pump(20.0).real() * a.pump(20.0).real() + a.pump(20.0).imag() * a.pump(20.0).imag(), 0.0);
    const auto b = load_scenario("fig3b");
    EXPECT_EQ(b.pump.segments()[2].k_p, 0.58);
    EXPECT_NEAR(b.pump.segments()[2].amplitude / a.pump.segments()[2].amplitude,
                1.5 * sonic_amplitude(b.cavity, 0.58) / (1.1 * sonic_amplitude(a.cavity, 0.55)), 1e-12);
}

TEST(Scenarios, RepulsiveDefectFlipsOnlyTheSign) {
    auto r = load_scenario("appendixD_repulsive", desk_domain());
    auto e = load_scenario("fig3e", desk_domain());
    EXPECT_EQ(r.defect.depth, -e.defect.depth);
    EXPECT_GT(r.defect.depth, 0.0);
    r.defect.depth = e.defect.depth;
    r.name = e.name;
    EXPECT_TRUE(r == e);
}

TEST(Scenarios, LadderRaisesSecondStepTowardsSonicPoint) {
    const auto p = default_cavity_params();
    const double fc = sonic_amplitude(p, 0.25);
    const auto c = load_scenario("fig3c");
    const auto d = load_scenario("fig3d");
    const auto e = load_scenario("fig3e");
    EXPECT_NEAR(c.pump.segments()[1].amplitude, 1.5 * fc, 1e-12);
    EXPECT_NEAR(d.pump.segments()[1].amplitude, 1.2 * fc, 1e-12);
    EXPECT_GT(c.pump.segments()[1].amplitude, d.pump.segments()[1].amplitude);
    EXPECT_GT(d.pump.segments()[1].amplitude, e.pump.segments()[1].amplitude);
    ScenarioLadder ladder{2.0, 1.1};
    EXPECT_NEAR(load_scenario("fig3c", {}, ladder).pump.segments()[1].amplitude, 2.0 * fc, 1e-12);
}

TEST(Scenarios, DeskDomainKeepsPumpLayout) {
    const auto full = load_scenario("fig3e");
    const auto desk = load_scenario("fig3e", desk_domain());
    EXPECT_EQ(desk.grid.n_points, 256u);
    EXPECT_EQ(desk.pump.segments()[1], full.pump.segments()[1]);
    EXPECT_GT(desk.pump.segments()[0].x_start, desk.grid.x_min);
}

}  // namespace
