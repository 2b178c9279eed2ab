#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "polariton/twa.hpp"

using namespace polariton;
namespace fs = std::filesystem;

namespace {

const CavityParams P = default_cavity_params();

Grid coarse_grid(std::size_t n = 32, double length = 64.0) {
    const Grid probe(0.0, length, n, 1.0);
    return probe.with_dt(probe.max_stable_dt(P.kinetic, 0.5));
}

TwaConfig vacuum_config(std::uint64_t realizations, std::uint64_t samples) {
    TwaConfig c;
    c.grid = coarse_grid();
    c.params = P;
    c.params.g = 0.0;
    c.absorber = Absorber{0.05, 0.0};
    c.n_realizations = realizations;
    c.samples_per_realization = samples;
    c.seed = 12345;
    c.n_blocks = 16;
    return c;
}

/// Weakly interacting driven box; small enough for many realizations.
TwaConfig driven_config(std::uint64_t realizations) {
    TwaConfig c;
    c.grid = coarse_grid(64, 64.0);
    c.params = P;
    c.pump = PumpProfile({{8.0, 40.0, 2.0, 0.2}}, 2.0);
    c.potential = PotentialProfile::gaussian(45.0, -1.0, 1.0);
    c.n_realizations = realizations;
    c.samples_per_realization = 2;
    c.burn_in = 50.0;
    c.seed = 77;
    c.n_blocks = 8;
    c.hysteresis.enabled = false;
    return c;
}

fs::path temp_path(const std::string& name) {
    return fs::temp_directory_path() / ("polariton_test_" + std::to_string(::getpid()) + "_" + name);
}

TEST(Noise, SameSeedRealizationAndStepGiveSameDraw) {
    NoiseStream a(5, 3, 16), b(5, 3, 16);
    std::vector<cplx> x(16), y(16);
    std::vector<double> sigma(16, 1.0);
    b.seek(4);
    for (int s = 1; s < 4; ++s) a.next(x, sigma);
    a.next(x, sigma);
    b.next(y, sigma);
    EXPECT_EQ(x, y);
    EXPECT_EQ(a.cursor(), 5u);
    std::vector<cplx> wrong(8);
    EXPECT_THROW(a.next(wrong, sigma), GridMismatch);
}

TEST(Stochastic, LosslessStepEqualsMeanFieldStepExactly) {
    CavityParams p = P;
    p.gamma = 0.0;
    const Grid grid = coarse_grid();
    std::vector<cplx> a(grid.size()), b;
    for (std::size_t i = 0; i < grid.size(); ++i) a[i] = std::polar(3.0 + std::sin(0.1 * grid.x(i)), 0.3 * grid.x(i));
    b = a;
    const auto pump = PumpProfile({{10.0, 30.0, 1.0, 0.2}}).sample(grid);
    SplitStepper plain(grid, p, PotentialProfile{}, Absorber{0.05, 0.0});
    StochasticStepper noisy(grid, p, PotentialProfile{}, Absorber{0.05, 0.0}, {true, false});
    for (double s : noisy.noise_sigma()) EXPECT_EQ(s, 0.0);
    NoiseStream noise(1, 0, grid.size());
    for (int n = 0; n < 100; ++n) {
        plain.step(a, pump);
        noisy.step(b, pump, noise);
    }
    EXPECT_EQ(a, b);
}

TEST(Stochastic, WignerShiftMatchesLowerOmegaZero) {
    // The -g/dx shift is a uniform frequency offset.
    const Grid grid = coarse_grid();
    CavityParams shifted = P;
    shifted.omega0 -= P.g / grid.dx();
    std::vector<cplx> a(grid.size(), cplx{2.0, 1.0}), b = a;
    const std::vector<cplx> none;
    SplitStepper ref(grid, shifted, PotentialProfile{}, Absorber{0.05, 0.0});
    StochasticStepper st(grid, P, PotentialProfile{}, Absorber{0.05, 0.0}, {false, true});
    NoiseStream noise(1, 0, grid.size());
    for (int n = 0; n < 50; ++n) {
        ref.step(a, none);
        st.step(b, none, noise);
    }
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(std::abs(a[i] - b[i]), 0.0, 1e-12);
}

TEST(Stochastic, NoiseVarianceIncludesAbsorberLoss) {
    const Grid grid = coarse_grid();
    const Absorber abs{0.1, 2.0};
    StochasticStepper st(grid, P, PotentialProfile{}, abs);
    const auto sigma = st.noise_sigma();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double loss = P.gamma + abs.loss(grid, grid.x(i));
        EXPECT_NEAR(2.0 * sigma[i] * sigma[i], -std::expm1(-loss * grid.dt()) / (2.0 * grid.dx()), 1e-15);
    }
}

TEST(Ensemble, VacuumOccupationIsHalfPerCell) {
    auto cfg = vacuum_config(2000, 5);
    BlockedAccumulator acc(cfg.grid, cfg.n_blocks);
    const std::vector<cplx> zero(cfg.grid.size());
    const auto report = run_ensemble(cfg, acc, zero);
    EXPECT_EQ(report.realizations, 2000u);
    EXPECT_EQ(report.samples, 10000u);
    EXPECT_EQ(acc.samples(), 10000u);

    // Block means give the standard error of each point.
    const double vac = 0.5 / cfg.grid.dx();
    const auto pooled = acc.pooled();
    const auto G1 = g1(pooled);
    for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
        double s = 0.0, ss = 0.0;
        for (const auto& b : acc.blocks) {
            const double m = b.sum_n(i) / static_cast<double>(b.count());
            s += m;
            ss += m * m;
        }
        const double nb = static_cast<double>(acc.blocks.size());
        const double se = std::sqrt((ss / nb - (s / nb) * (s / nb)) / (nb - 1.0));
        EXPECT_LT(std::abs(pooled.sum_n(i) / static_cast<double>(pooled.count()) - vac), 3.0 * se) << i;
        EXPECT_LT(std::abs(G1[i]), 3.0 * se) << i;
        EXPECT_NEAR(pooled.sum_n(i) / static_cast<double>(pooled.count()) / vac, 1.0, 0.05);
    }
}

TEST(Ensemble, LinearDrivenMeanMatchesSteadyAmplitude) {
    // Time average of one long trajectory against F / (Delta_p + i gamma/2).
    const double L = 64.0;
    const Grid grid = coarse_grid(32, L);
    const double k = 2.0 * std::numbers::pi * 2.0 / L;
    CavityParams p = P;
    p.g = 0.0;
    const double F = 2.0;
    const auto pump = PumpProfile({{-1.0, L + 1.0, F, k}}).sample(grid);
    const double delta = p.omega_p - p.omega0 - p.kinetic * k * k;
    const cplx expected = F / cplx{delta, 0.5 * p.gamma};
    StochasticStepper st(grid, p, PotentialProfile{}, Absorber{0.05, 0.0});
    NoiseStream noise(3, 0, grid.size());
    std::vector<cplx> psi(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) psi[i] = expected * std::polar(1.0, k * grid.x(i));
    cplx mean{0.0, 0.0};
    const int steps = 20000;
    for (int n = 0; n < steps; ++n) {
        st.step(psi, pump, noise);
        for (std::size_t i = 0; i < grid.size(); ++i) mean += psi[i] * std::polar(1.0, -k * grid.x(i));
    }
    mean /= static_cast<double>(steps) * static_cast<double>(grid.size());
    EXPECT_NEAR(std::abs(mean - expected) / std::abs(expected), 0.0, 0.02);
}

TEST(Ensemble, ZeroRealizationsLeavesAccumulatorUntouched) {
    auto cfg = vacuum_config(0, 1);
    BlockedAccumulator acc(cfg.grid, cfg.n_blocks);
    const BlockedAccumulator before = acc;
    const auto report = run_ensemble(cfg, acc, std::vector<cplx>(cfg.grid.size()));
    EXPECT_EQ(report.realizations, 0u);
    EXPECT_TRUE(report.status.empty());
    EXPECT_TRUE(acc == before);
}

TEST(Ensemble, IndependentOfWorkerCount) {
    auto cfg = driven_config(24);
    const auto init = prepare_initial_state(cfg);
    BlockedAccumulator one(cfg.grid, cfg.n_blocks);
    run_ensemble(cfg, one, init.psi);
    BlockedAccumulator again(cfg.grid, cfg.n_blocks);
    run_ensemble(cfg, again, init.psi);
    EXPECT_TRUE(one == again);
    cfg.workers = 8;
    BlockedAccumulator eight(cfg.grid, cfg.n_blocks);
    run_ensemble(cfg, eight, init.psi);
    EXPECT_TRUE(one == eight);
    cfg.workers = 5;
    BlockedAccumulator five(cfg.grid, cfg.n_blocks);
    run_ensemble(cfg, five, init.psi);
    EXPECT_TRUE(one == five);
}

TEST(Ensemble, DifferentSeedsDiffer) {
    auto cfg = driven_config(4);
    const auto init = prepare_initial_state(cfg);
    BlockedAccumulator a(cfg.grid, cfg.n_blocks), b(cfg.grid, cfg.n_blocks);
    run_ensemble(cfg, a, init.psi);
    cfg.seed += 1;
    run_ensemble(cfg, b, init.psi);
    EXPECT_FALSE(a == b);
}

TEST(Ensemble, ResumeFromCheckpointMatchesSingleRun) {
    auto cfg = driven_config(12);
    const auto init = prepare_initial_state(cfg);
    BlockedAccumulator full(cfg.grid, cfg.n_blocks);
    run_ensemble(cfg, full, init.psi);

    const auto path = temp_path("resume.ck");
    auto partial_cfg = cfg;
    partial_cfg.n_realizations = 5;
    BlockedAccumulator partial(cfg.grid, cfg.n_blocks);
    EnsembleOptions opt;
    opt.checkpoint = path;
    opt.config_hash = 42;
    run_ensemble(partial_cfg, partial, init.psi, opt);

    BlockedAccumulator resumed(cfg.grid, cfg.n_blocks);
    load_checkpoint(path, resumed, 42);
    EXPECT_EQ(resumed.next_realization, 5u);
    cfg.workers = 3;
    const auto report = run_ensemble(cfg, resumed, init.psi, opt);
    EXPECT_EQ(report.realizations, 7u);
    EXPECT_TRUE(resumed == full);

    BlockedAccumulator wrong(cfg.grid, cfg.n_blocks);
    EXPECT_THROW(load_checkpoint(path, wrong, 43), ConfigError);
    BlockedAccumulator layout(cfg.grid, cfg.n_blocks + 1);
    EXPECT_THROW(load_checkpoint(path, layout, 42), ConfigError);
    fs::remove(path);
}

TEST(Ensemble, CorruptCheckpointIsRejected) {
    const auto path = temp_path("bad.ck");
    {
        std::ofstream out(path, std::ios::binary);
        out << "not a checkpoint";
    }
    const Grid grid = coarse_grid();
    BlockedAccumulator acc(grid, 4);
    EXPECT_THROW(load_checkpoint(path, acc, 0), Error);
    fs::remove(path);
}

TEST(Ensemble, NonFiniteRealizationsAreCountedAndSkipped) {
    auto cfg = vacuum_config(6, 2);
    cfg.workers = 2;
    BlockedAccumulator acc(cfg.grid, cfg.n_blocks);
    std::vector<cplx> init(cfg.grid.size());
    init[3] = cplx{std::numeric_limits<double>::quiet_NaN(), 0.0};
    const auto report = run_ensemble(cfg, acc, init);
    EXPECT_EQ(report.failed, 6u);
    EXPECT_EQ(acc.failed, 6u);
    EXPECT_EQ(acc.samples(), 0u);
    ASSERT_EQ(report.status.size(), 6u);
    for (const auto& s : report.status) {
        EXPECT_FALSE(s.ok);
        EXPECT_FALSE(s.error.empty());
    }
}

TEST(Config, Validation) {
    auto cfg = vacuum_config(1, 1);
    cfg.sample_interval = 1.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = vacuum_config(1, 0);
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = vacuum_config(1, 1);
    cfg.workers = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = vacuum_config(1, 1);
    EXPECT_DOUBLE_EQ(cfg.effective_burn_in(), 10.0 / P.gamma);
    EXPECT_DOUBLE_EQ(cfg.effective_interval(), 2.0 / P.gamma);
}

TEST(Ensemble, RejectsMismatchedInitialState) {
    auto cfg = vacuum_config(1, 1);
    BlockedAccumulator acc(cfg.grid, cfg.n_blocks);
    EXPECT_THROW(run_ensemble(cfg, acc, std::vector<cplx>(3)), GridMismatch);
}

}  // namespace
