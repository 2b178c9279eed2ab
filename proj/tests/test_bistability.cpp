#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "polariton/bistability.hpp"

using namespace polariton;

namespace {

const CavityParams P = default_cavity_params();

TEST(EffectiveDetuning, ZeroWavevectorGivesBareDetuning) {
    EXPECT_DOUBLE_EQ(effective_detuning(P, 0.0), P.detuning());
}

TEST(EffectiveDetuning, DefaultsAtQuarterInverseMicron) {
    // Recomputed in meV: 0.49 - (hbar^2 k^2 / 2 m*) with m* = 3e-5 m_e.
    const double kin_mev = constants::hbar2_over_2me_mev_um2 / 3e-5 * 0.0625;
    const double expected = mev_to_angfreq(0.49 - kin_mev);
    EXPECT_NEAR(effective_detuning(P, 0.25), expected, 1e-12);
    EXPECT_NEAR(effective_detuning(P, 0.25), 0.6238497620, 1e-9);
}

TEST(EffectiveDetuning, CancelsAtResonantWavevector) {
    const double k = std::sqrt(P.detuning() / P.kinetic);
    EXPECT_NEAR(effective_detuning(P, k), 0.0, 1e-14);
}

TEST(DensityResponse, ZeroPumpGivesZeroDensity) {
    const auto r = density_response(0.0, 0.6, P);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].n, 0.0);
}

TEST(DensityResponse, MonotoneBelowThresholdMatchesScan) {
    const double delta = 0.9 * bistability_threshold(P);
    for (double F : {0.01, 0.1, 0.5, 1.0, 3.0}) {
        const auto r = density_response(F, delta, P);
        ASSERT_EQ(r.size(), 1u);
        const auto scan = oracle::cubic_roots_scan(delta, P.gamma, P.g * F * F, 10.0);
        ASSERT_EQ(scan.size(), 1u);
        EXPECT_NEAR(P.g * r[0].n, scan[0], 1e-8);
        EXPECT_EQ(r[0].stability, Stability::stable);
    }
}

TEST(DensityResponse, ThreeRootsMidwayBetweenTurningPoints) {
    const double delta = 2.0 * P.gamma;
    const auto tp = turning_points(delta, P);
    ASSERT_TRUE(tp);
    const double F = 0.5 * (tp->F1 + tp->F2);
    const auto r = density_response(F, delta, P);
    ASSERT_EQ(r.size(), 3u);
    const auto scan = oracle::cubic_roots_scan(delta, P.gamma, P.g * F * F, 1.0);
    ASSERT_EQ(scan.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(P.g * r[i].n, scan[i], 1e-8);
    EXPECT_EQ(r[0].stability, Stability::stable);
    EXPECT_EQ(r[1].stability, Stability::unstable);
    EXPECT_EQ(r[2].stability, Stability::stable);
}

TEST(DensityResponse, RootsSatisfyResponseEquation) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dd(-0.5, 1.5), df(0.0, 12.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const double delta = dd(rng), F = df(rng);
        const auto roots = density_response(F, delta, P);
        ASSERT_TRUE(roots.size() == 1 || roots.size() == 3);
        int unstable = 0;
        for (const auto& r : roots) {
            EXPECT_GE(r.n, 0.0);
            if (F > 0.0) {
                EXPECT_NEAR(pump_intensity(r.n, delta, P) / (F * F), 1.0, 1e-10);
            }
            unstable += r.stability == Stability::unstable;
        }
        const auto tp = turning_points(delta, P);
        const bool inside = tp && delta > bistability_threshold(P) && F > tp->F2 && F < tp->F1;
        EXPECT_EQ(roots.size() == 3, inside) << "delta=" << delta << " F=" << F;
        if (roots.size() == 3) {
            EXPECT_EQ(unstable, 1);
            EXPECT_EQ(roots[1].stability, Stability::unstable);
            EXPECT_LT(roots[0].n, roots[1].n);
            EXPECT_LT(roots[1].n, roots[2].n);
        }
    }
}

TEST(DensityResponse, MultiplicityChangesAtTurningPoints) {
    const double delta = effective_detuning(P, 0.25);
    const auto tp = turning_points(delta, P);
    ASSERT_TRUE(tp);
    const double eps = 1e-8;
    EXPECT_EQ(density_response(tp->F2 * (1 - eps), delta, P).size(), 1u);
    EXPECT_EQ(density_response(tp->F2 * (1 + eps), delta, P).size(), 3u);
    EXPECT_EQ(density_response(tp->F1 * (1 - eps), delta, P).size(), 3u);
    EXPECT_EQ(density_response(tp->F1 * (1 + eps), delta, P).size(), 1u);
}

TEST(DensityResponse, RejectsNegativeAmplitude) { EXPECT_THROW(density_response(-1.0, 0.5, P), Error); }

TEST(TurningPoints, DoubleRootAtThreshold) {
    const auto tp = turning_points(bistability_threshold(P), P);
    ASSERT_TRUE(tp);
    EXPECT_NEAR(tp->F1, tp->F2, 1e-12 * tp->F1);
}

TEST(TurningPoints, AbsentBelowThreshold) {
    EXPECT_FALSE(turning_points(0.99 * bistability_threshold(P), P));
}

TEST(TurningPoints, MatchDenseTabulationExtrema) {
    const double delta = 2.0 * P.gamma;
    const auto tp = turning_points(delta, P);
    ASSERT_TRUE(tp);
    const auto ext = oracle::intensity_extrema(delta, P, 2.0 * delta / P.g);
    ASSERT_EQ(ext.size(), 2u);
    EXPECT_NEAR(tp->F1 / ext[0], 1.0, 1e-8);
    EXPECT_NEAR(tp->F2 / ext[1], 1.0, 1e-8);
    EXPECT_GT(tp->F1, tp->F2);
}

TEST(TurningPoints, DefaultWorkingPoint) {
    // Frozen from the dense-tabulation oracle.
    const auto tp = turning_points(effective_detuning(P, 0.25), P);
    ASSERT_TRUE(tp);
    EXPECT_NEAR(tp->F1, 8.916381792, 1e-8);
    EXPECT_NEAR(tp->F2, 1.320341245, 1e-8);
}

TEST(SonicPoint, SubstitutionIdentity) {
    const double delta = effective_detuning(P, 0.25);
    const auto s = sonic_point(delta, P);
    EXPECT_NEAR(pump_intensity(s.n, delta, P), s.F * s.F, 1e-12 * s.F * s.F);
    EXPECT_NEAR(P.sound_speed(s.n), std::sqrt(P.hbar_over_mass() * delta), 1e-12);
}

TEST(SonicPoint, DefaultDensityIsARoot) {
    const double delta = effective_detuning(P, 0.25);
    const auto s = sonic_point(delta, P);
    EXPECT_NEAR(s.n, 1368.75, 0.01);
    bool found = false;
    for (const auto& r : density_response(s.F, delta, P)) found |= std::abs(r.n - s.n) < 1e-6 * s.n;
    EXPECT_TRUE(found);
}

TEST(SonicPoint, RejectsNonPositiveDetuning) {
    EXPECT_THROW(sonic_point(0.0, P), InvalidDetuning);
    EXPECT_THROW(sonic_point(-0.1, P), InvalidDetuning);
}

TEST(Curve, SamplesSatisfyResponseAndSlopeLabels) {
    const double delta = effective_detuning(P, 0.25);
    const auto c = bistability_curve(delta, P, 2500.0, 1001);
    ASSERT_TRUE(c.F1 && c.F2);
    for (const auto& s : c.samples) {
        EXPECT_NEAR(s.F * s.F, pump_intensity(s.n, delta, P), 1e-10 * std::max(1.0, s.F * s.F));
        EXPECT_EQ(s.stability == Stability::unstable, pump_intensity_slope(s.n, delta, P) < 0.0);
    }
}

TEST(Curve, NoTurningPointsBelowThreshold) {
    const auto c = bistability_curve(0.5 * bistability_threshold(P), P, 100.0, 11);
    EXPECT_FALSE(c.F1);
    EXPECT_FALSE(c.F2);
}

TEST(Hysteresis, PassesDifferOnlyInsideBistableInterval) {
    const double delta = effective_detuning(P, 0.25);
    const auto tp = *turning_points(delta, P);
    std::vector<double> amps;
    for (int i = 0; i <= 400; ++i) amps.push_back(12.0 * i / 400.0);
    const auto up = hysteresis_sweep(delta, P, amps, SweepDirection::up);
    auto down = hysteresis_sweep(delta, P, amps, SweepDirection::down);
    std::reverse(down.begin(), down.end());
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const bool inside = amps[i] > tp.F2 && amps[i] < tp.F1;
        if (inside) EXPECT_LT(up[i].n, down[i].n);
        else EXPECT_DOUBLE_EQ(up[i].n, down[i].n);
    }
}

TEST(Hysteresis, SingleValuedBelowThreshold) {
    const double delta = 0.8 * bistability_threshold(P);
    std::vector<double> amps;
    for (int i = 0; i <= 50; ++i) amps.push_back(0.1 * i);
    const auto up = hysteresis_sweep(delta, P, amps, SweepDirection::up);
    for (std::size_t i = 1; i < up.size(); ++i) EXPECT_GT(up[i].n, up[i - 1].n);
}

TEST(Waterfall, DefaultsSatisfyUpstreamConstraint) {
    WaterfallParameters w{P, 0.25, std::nullopt, std::nullopt};
    EXPECT_TRUE(validate_waterfall_config(w).empty());
}

TEST(Waterfall, FastUpstreamFlowViolates) {
    WaterfallParameters w{P, 1.0, std::nullopt, std::nullopt};
    const auto v = validate_waterfall_config(w);
    ASSERT_FALSE(v.empty());
    EXPECT_EQ(v[0].constraint, Constraint::upstream_sonic);
}

TEST(Waterfall, UpstreamBoundValue) {
    // Frozen from the default constants.
    EXPECT_NEAR(upstream_wavevector_bound(P), 0.358622, 1e-6);
}

TEST(Waterfall, DownstreamThresholdMatchesBisection) {
    auto violates_b = [&](double kd) {
        WaterfallParameters w{P, 0.25, kd, std::nullopt};
        for (const auto& v : validate_waterfall_config(w))
            if (v.constraint == Constraint::downstream_bistable) return true;
        return false;
    };
    double lo = 0.0, hi = 2.0;
    ASSERT_FALSE(violates_b(lo));
    ASSERT_TRUE(violates_b(hi));
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        (violates_b(mid) ? hi : lo) = mid;
    }
    EXPECT_NEAR(0.5 * (lo + hi), downstream_wavevector_bound(P), 1e-10);
}

TEST(Waterfall, BistableWidthApproachesExactIntervalForLargeDetuning) {
    // The closed form drops O(gamma^2/Delta^2) terms of F1^2 - F2^2.
    CavityParams p = P;
    for (double ratio : {10.0, 30.0, 100.0}) {
        p.omega_p = ratio * p.gamma;
        const auto tp = *turning_points(p.detuning(), p);
        const double exact = tp.F1 * tp.F1 - tp.F2 * tp.F2;
        EXPECT_NEAR(bistable_interval_width(p, 0.0) / exact, 1.0, 2.0 / (ratio * ratio));
    }
    EXPECT_GT(bistable_interval_width(P, 0.5), 0.0);
}

TEST(Waterfall, SlowDownstreamSoundViolatesUpperBranch) {
    WaterfallParameters w{P, 0.25, 0.55, 0.01};
    bool found = false;
    for (const auto& v : validate_waterfall_config(w)) found |= v.constraint == Constraint::downstream_upper_branch;
    EXPECT_TRUE(found);
}

}  // namespace
