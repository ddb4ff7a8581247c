#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "support.hpp"

using namespace porbit;
using porbit::testing::circle;
using porbit::testing::default_family;
using porbit::testing::rel;

namespace {

constexpr double pi = std::numbers::pi;

SystemConfig inner_two_body(double h = 0.5) { return SystemConfig::equal_masses(2, 2, h, build_family(3, -1, 1.0, 2.0)); }
SystemConfig three_body() { return SystemConfig::equal_masses(3, 2, 0.5, default_family()); }

CriticalPoint solved_circle(std::size_t harmonics, const SampleGrid& grid) {
    return minimize(circle(0.3, harmonics), inner_two_body(), grid, SolverSettings{});
}

// The non-circular three-body orbit at f ~ 99.06 (single start, seed 2).
CriticalPoint second_orbit(std::size_t harmonics) {
    SolverSettings s;
    s.starts = 1;
    s.seed = 2;
    const auto points = multistart(three_body(), harmonics, SampleGrid::for_harmonics(harmonics), s);
    if (points.empty()) return {};
    return points.front();
}

Loop perturbed(const Loop& u, double level, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-1.0, 1.0);
    std::vector<double> a(u.cos_coeffs().begin(), u.cos_coeffs().end());
    std::vector<double> b(u.sin_coeffs().begin(), u.sin_coeffs().end());
    for (auto& v : a) v *= 1.0 + level * noise(rng);
    for (auto& v : b) v *= 1.0 + level * noise(rng);
    return make_loop(u.n_bodies(), u.dimension(), u.harmonic_count(), a, b);
}

}  // namespace

TEST(Period, CircularOracle) {
    const SampleGrid grid(64);
    const auto cp = solved_circle(4, grid);
    ASSERT_TRUE(cp.converged);
    const double T = period(cp, inner_two_body(), grid);
    EXPECT_LE(rel(T, pi * std::sqrt(2.0 / 3.0)), 1e-6);
    EXPECT_NEAR(T, 2.5651, 1e-4);
    EXPECT_LE(rel(T, porbit::testing::circular_period(3, 0.5)), 1e-6);
}

TEST(Period, Preconditions) {
    const SampleGrid grid(64);
    CriticalPoint cp = solved_circle(4, grid);
    cp.converged = false;
    EXPECT_THROW(period(cp, inner_two_body(), grid), InvalidArgument);
    CriticalPoint flat;
    flat.loop = zero_loop(2, 2, 4);
    flat.converged = true;
    flat.f_value = 0.0;
    EXPECT_THROW(period(flat, inner_two_body(), grid), InvalidArgument);
}

TEST(Period, FormulaAndEnergyScaling) {
    const SampleGrid grid(64);
    const Loop u = random_loop(3, 2, 4, 1.0, 77);
    for (double h : {0.25, 0.5, 1.0, 2.0}) {
        const auto config = three_body().with_energy(h);
        const auto e = action_value(u, config, grid);
        const double T = period_of(u, config, grid);
        EXPECT_LE(rel(T * T * e.potential_integral, 0.5 * std::pow(h1_norm(u, config), 2)), 1e-12);
        // Doubling h adds h to int (h - V) and shrinks T accordingly.
        const auto e2 = action_value(u, config.with_energy(2 * h), grid);
        EXPECT_NEAR(e2.potential_integral - e.potential_integral, h, 1e-12 * e2.potential_integral);
        EXPECT_LE(rel(period_of(u, config.with_energy(2 * h), grid), T * std::sqrt(e.potential_integral / e2.potential_integral)),
                  1e-12);
    }
}

TEST(ToOrbit, CircularKinematics) {
    const SampleGrid grid(64);
    const auto config = inner_two_body();
    const auto cp = solved_circle(4, grid);
    const double T = period(cp, config, grid);
    const auto orbit = to_orbit(cp, config, T, 64, grid);
    const double R = 0.5, speed = 2 * pi * R / T;
    ASSERT_EQ(orbit.times.size(), 64u);
    for (std::size_t s = 0; s < 64; ++s) {
        EXPECT_NEAR(orbit.times[s], T * s / 64.0, 1e-14);
        const auto q = orbit.positions.at(s, 0), v = orbit.velocities.at(s, 0);
        EXPECT_NEAR(std::hypot(q[0], q[1]), R, 1e-5);
        EXPECT_NEAR(std::hypot(v[0], v[1]), speed, 1e-5 * speed);
        EXPECT_NEAR(orbit.energy_series[s], 0.5, 1e-8);
        EXPECT_TRUE(std::isfinite(orbit.energy_series[s]));
    }
    EXPECT_GT(T, 0.0);
}

TEST(ToOrbit, AntiperiodicInPhysicalTime) {
    const SampleGrid grid(64);
    const auto config = three_body();
    const auto cp = second_orbit(8);
    ASSERT_TRUE(cp.converged);
    const double T = period(cp, config, grid);
    const auto orbit = to_orbit(cp, config, T, 32, grid);
    const auto u0 = cp.loop.position_at(0.0);
    const auto q0 = orbit.positions.at(0), qh = orbit.positions.at(16);
    for (std::size_t c = 0; c < u0.size(); ++c) {
        EXPECT_NEAR(q0[c], u0[c], 1e-12);
        EXPECT_NEAR(qh[c], -q0[c], 1e-12);
    }
    EXPECT_LE(orbit.residuals.periodicity, 1e-12);
    EXPECT_THROW(to_orbit(cp, config, T, 31, grid), InvalidArgument);
    EXPECT_THROW(to_orbit(cp, config, -1.0, 32, grid), InvalidArgument);
}

TEST(ToOrbit, VelocitiesAreLoopVelocitiesOverT) {
    const SampleGrid grid(64);
    const auto config = three_body();
    const auto cp = second_orbit(8);
    const double T = period(cp, config, grid);
    const auto orbit = to_orbit(cp, config, T, 64, grid);
    const auto s = evaluate(cp.loop, grid);
    for (std::size_t m = 0; m < 64; ++m) {
        for (std::size_t c = 0; c < 6; ++c) EXPECT_NEAR(orbit.velocities.at(m)[c] * T, s.velocities.at(m)[c], 1e-12);
    }
}

TEST(VerifyOrbit, CircularOracleAtDefaultResolution) {
    const SampleGrid grid(128);
    const auto config = inner_two_body();
    const auto cp = solved_circle(16, grid);
    ASSERT_TRUE(cp.converged);
    const auto orbit = to_orbit(cp, config, period(cp, config, grid), 128, grid);
    EXPECT_EQ(orbit.residuals.nodes, 512u);
    EXPECT_LE(orbit.residuals.ode, 1e-6);
    EXPECT_LE(orbit.residuals.energy, 1e-6);
    // The closed-form loop itself is an exact solution.
    CriticalPoint exact = cp;
    exact.loop = circle(0.5, 16);
    const auto direct = to_orbit(exact, config, pi * std::sqrt(2.0 / 3.0), 128, grid);
    EXPECT_LE(direct.residuals.ode, 1e-13);
    EXPECT_LE(direct.residuals.energy, 1e-13);
}

TEST(VerifyOrbit, PerturbedOrbitFails) {
    const SampleGrid grid(64);
    const auto config = three_body();
    for (const auto& cp : {second_orbit(8), solved_circle(4, SampleGrid(64))}) {
        const auto& cfg = cp.loop.n_bodies() == 3 ? config : inner_two_body();
        const double T = period(cp, cfg, grid);
        OrbitSolution orbit = to_orbit(cp, cfg, T, 64, grid);
        orbit.loop = perturbed(cp.loop, 0.01, 3);
        const auto report = verify_orbit(orbit, cfg, verification_grid(grid));
        EXPECT_GT(report.ode, 1e-4);
        EXPECT_GT(report.energy, 1e-4);
    }
}

TEST(VerifyOrbit, NonCollisionAndNonConstancy) {
    const auto config = three_body();
    const auto cp = second_orbit(8);
    ASSERT_TRUE(cp.converged);
    EXPECT_GT(h1_norm(cp.loop, config), 0.0);
    EXPECT_GE(min_separation(cp.loop, SampleGrid(1024)), cp.p_value / 2);
}

TEST(VerifyOrbit, SecondOrbitRefinesSpectrally) {
    // Regression baseline: ODE residual of the f ~ 99.06 orbit at K = 8, 16, 32 (M = 8K).
    std::vector<double> ode;
    for (std::size_t harmonics : {8u, 16u, 32u}) {
        const auto cp = second_orbit(harmonics);
        ASSERT_TRUE(cp.converged);
        EXPECT_LE(rel(cp.f_value, 99.0607), 1e-5);
        const SampleGrid grid = SampleGrid::for_harmonics(harmonics);
        ode.push_back(to_orbit(cp, three_body(), period(cp, three_body(), grid), 64, grid).residuals.ode);
    }
    EXPECT_GE(ode[0] / ode[1], 10.0);
    EXPECT_GE(ode[1] / ode[2], 10.0);
    EXPECT_LE(ode[2], 1e-4);
}

TEST(VerifyOrbit, GenericThreeBodyOrbitAtSixteenHarmonics) {
    // Non-circular three-body solution at K = 16, M = 128: ODE and energy residual <= 1e-4.
    const auto cp = second_orbit(16);
    ASSERT_TRUE(cp.converged);
    const SampleGrid grid = SampleGrid::for_harmonics(16);
    const auto orbit = to_orbit(cp, three_body(), period(cp, three_body(), grid), 64, grid);
    EXPECT_LE(orbit.residuals.ode, 1e-4);
    EXPECT_LE(orbit.residuals.energy, 1e-4);
}
