#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "support.hpp"

using namespace porbit;
using porbit::testing::default_family;

TEST(BuildFamily, DefaultEndpoints) {
    const auto fam = default_family();
    EXPECT_EQ(fam.c_bound(), 1.0);
    // Values and slopes of the two laws at the radii.
    EXPECT_NEAR(fam.value(0.5), -8.0, 1e-12);
    EXPECT_NEAR(fam.derivative(0.5), 48.0, 1e-11);
    EXPECT_NEAR(fam.value(1.5), -2.0 / 3.0, 1e-14);
    EXPECT_NEAR(fam.derivative(1.5), 4.0 / 9.0, 1e-14);
    // The blend meets them from inside.
    const double eps = 1e-7;
    EXPECT_LE(std::abs(fam.value(0.5 + eps) + std::pow(0.5 + eps, -3.0)), 1e-10 * 8.0);
    EXPECT_LE(std::abs(fam.derivative(0.5 + eps) - 3.0 * std::pow(0.5 + eps, -4.0)), 1e-10 * 48.0);
    EXPECT_LE(std::abs(fam.value(1.5 - eps) + 1.0 / (1.5 - eps)), 1e-10);
    EXPECT_LE(std::abs(fam.derivative(1.5 - eps) - std::pow(1.5 - eps, -2.0)), 1e-10);
}

TEST(BuildFamily, RangeErrors) {
    EXPECT_THROW(build_family(2.0, -1.0, 0.5, 1.5), InvalidArgument);
    EXPECT_THROW(build_family(1.0, -1.0, 0.5, 1.5), InvalidArgument);
    EXPECT_THROW(build_family(3.0, -2.0, 0.5, 1.5), InvalidArgument);
    EXPECT_THROW(build_family(3.0, 0.0, 0.5, 1.5), InvalidArgument);
    EXPECT_THROW(build_family(3.0, -3.0, 0.5, 1.5), InvalidArgument);
    EXPECT_THROW(build_family(3.0, -1.0, 1.5, 0.5), InvalidArgument);
    EXPECT_THROW(build_family(3.0, -1.0, 0.0, 1.5), InvalidArgument);
    try {
        build_family(2.0, -1.0, 0.5, 1.5);
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("alpha > 2"), std::string::npos);
    }
}

TEST(BuildFamily, BlendStaysNegativeAcrossParameters) {
    for (double alpha : {2.01, 3.0, 5.0, 12.0}) {
        for (double theta : {-1.99, -1.0, -0.01}) {
            for (auto [r1, r2] : {std::pair{0.5, 1.5}, std::pair{0.01, 100.0}, std::pair{1.0, 1.001}}) {
                const auto fam = build_family(alpha, theta, r1, r2);
                EXPECT_TRUE(certify(fam).all_pass()) << alpha << ' ' << theta << ' ' << r1 << ' ' << r2;
            }
        }
    }
}

TEST(PairValue, PowerLawPieces) {
    const auto fam = default_family();
    EXPECT_DOUBLE_EQ(pair_value(fam, 0.25), -64.0);
    EXPECT_DOUBLE_EQ(pair_value(fam, 4.0), -0.25);
    EXPECT_THROW(pair_value(fam, 0.0), InvalidArgument);
    EXPECT_THROW(pair_value(fam, -1.0), InvalidArgument);
    EXPECT_LE(pair_value(fam, 1e-6), -std::pow(1e-6, -3.0) * (1 - 1e-12));
    double prev = pair_value(fam, 1e-3);
    for (double s = 1e-4; s > 1e-9; s /= 10) {
        const double v = pair_value(fam, s);
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(PairValue, AlwaysNegative) {
    const auto fam = default_family();
    for (double s = 1e-3; s < 50.0; s *= 1.01) EXPECT_LT(pair_value(fam, s), 0.0) << s;
}

TEST(PairGradient, Examples) {
    const auto fam = default_family();
    const std::vector<double> near{0.25, 0.0}, far{4.0, 0.0};
    const auto gn = pair_gradient(fam, near), gf = pair_gradient(fam, far);
    EXPECT_NEAR(gn[0], 768.0, 1e-10);
    EXPECT_EQ(gn[1], 0.0);
    EXPECT_NEAR(gf[0], 1.0 / 16.0, 1e-15);
    EXPECT_EQ(gf[1], 0.0);
    const std::vector<double> zero{0.0, 0.0};
    EXPECT_THROW(pair_gradient(fam, zero), InvalidArgument);
}

TEST(PairGradient, EulerIdentityInside) {
    // <grad V(xi), xi> = -alpha V(xi) on the inner piece.
    const auto fam = default_family();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int n = 0; n < 500; ++n) {
        std::vector<double> xi{unit(rng), unit(rng), unit(rng)};
        double r = std::hypot(xi[0], xi[1], xi[2]);
        const double target = 0.5 * std::abs(unit(rng)) + 1e-3;
        for (auto& v : xi) v *= target / r;
        const auto g = pair_gradient(fam, xi);
        const double lhs = g[0] * xi[0] + g[1] * xi[1] + g[2] * xi[2];
        const double rhs = -fam.alpha() * fam.value(target);
        EXPECT_LE(std::abs(lhs - rhs), 1e-12 * std::abs(rhs));
    }
}

TEST(PairGradient, MatchesFiniteDifferenceOfValue) {
    const auto fam = default_family();
    for (double s = 0.3; s < 3.0; s += 0.01) {
        const double h = 1e-6 * s;
        const double fd = (fam.value(s + h) - fam.value(s - h)) / (2 * h);
        EXPECT_NEAR(fam.derivative(s), fd, 1e-6 * std::max(1.0, std::abs(fd))) << s;
    }
}

TEST(Certify, DefaultFamilyPasses) {
    const auto report = certify(default_family());
    EXPECT_TRUE(report.nonpositive.pass);
    EXPECT_TRUE(report.inner_growth.pass);
    EXPECT_TRUE(report.outer_bound.pass);
    EXPECT_TRUE(report.pair_symmetry.pass);
    EXPECT_TRUE(report.pair_symmetry.structural);
    EXPECT_TRUE(report.continuity.pass);
    EXPECT_TRUE(report.all_pass());
    EXPECT_TRUE(std::isfinite(report.nonpositive.worst_margin));
    EXPECT_TRUE(std::isfinite(report.inner_growth.worst_margin));
}

TEST(Certify, CorruptedBlendFailsWithWitness) {
    const auto fam = default_family();
    const auto bad = fam.with_blend_weights({1.0, -1.0});
    const auto report = certify(bad);
    EXPECT_FALSE(report.nonpositive.pass);
    EXPECT_FALSE(report.all_pass());
    EXPECT_GT(report.nonpositive.witness, fam.r1());
    EXPECT_LT(report.nonpositive.witness, fam.r2());
    EXPECT_GT(bad.value(report.nonpositive.witness), 0.0);
    EXPECT_TRUE(report.pair_symmetry.pass);
}

TEST(Certify, InnerEqualityAndOuterBound) {
    const auto fam = default_family();
    for (double s = 1e-3; s <= fam.r1(); s *= 1.05) {
        const double lhs = s * fam.derivative(s) + fam.alpha() * fam.value(s);
        EXPECT_LE(std::abs(lhs), 1e-12 * fam.alpha() * std::abs(fam.value(s)));
    }
    for (double s = fam.r2(); s < 100.0; s *= 1.05) {
        EXPECT_LE(s * fam.derivative(s), fam.c_bound() * std::pow(s, fam.theta()) * (1 + 1e-12));
    }
}

TEST(Gordon, StrongForceBound) {
    // V(s) s^2 <= -A on (0, r1] with A = r1^{2 - alpha}, the sharp constant at s = r1.
    const auto fam = default_family();
    const double A = std::pow(fam.r1(), 2.0 - fam.alpha());
    for (double s = 1e-6; s <= fam.r1(); s *= 1.1) EXPECT_LE(fam.value(s) * s * s, -A * (1 - 1e-12)) << s;
    EXPECT_NEAR(fam.value(fam.r1()) * fam.r1() * fam.r1(), -A, 1e-12 * A);
}

TEST(TotalPotential, TwoBodyExample) {
    const auto config = SystemConfig::equal_masses(2, 2, 0.5, default_family());
    const std::vector<double> q{0.125, 0.0, -0.125, 0.0};
    const auto pf = total_potential_and_forces(config, q);
    EXPECT_DOUBLE_EQ(pf.value, -64.0);
    EXPECT_NEAR(pf.gradient[0], 768.0, 1e-10);
    EXPECT_NEAR(pf.gradient[2], -768.0, 1e-10);
    EXPECT_EQ(pf.gradient[1], 0.0);
    EXPECT_EQ(pf.gradient[3], 0.0);
}

TEST(TotalPotential, NewtonThirdLaw) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 1.0);
    for (std::size_t bodies : {2u, 3u, 5u}) {
        const auto config = SystemConfig::equal_masses(bodies, 3, 0.5, default_family());
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<double> q(bodies * 3);
            for (auto& v : q) v = n(rng);
            const auto pf = total_potential_and_forces(config, q);
            EXPECT_LT(pf.value, 0.0);
            double scale = 0.0;
            for (double g : pf.gradient) scale = std::max(scale, std::abs(g));
            for (std::size_t d = 0; d < 3; ++d) {
                double sum = 0.0;
                for (std::size_t i = 0; i < bodies; ++i) sum += pf.gradient[i * 3 + d];
                EXPECT_LE(std::abs(sum), 1e-12 * scale);
            }
        }
    }
}

TEST(TotalPotential, CollinearSymmetric) {
    const auto config = SystemConfig::equal_masses(3, 2, 0.5, default_family());
    const std::vector<double> q{-1.0, 0.0, 0.0, 0.0, 1.0, 0.0};
    const auto pf = total_potential_and_forces(config, q);
    EXPECT_NEAR(pf.gradient[0] + pf.gradient[2] + pf.gradient[4], 0.0, 1e-14);
    EXPECT_NEAR(pf.gradient[2], 0.0, 1e-14);
    // V = 2 V(1) + V(2)
    EXPECT_NEAR(pf.value, 2 * config.potential().value(1.0) + config.potential().value(2.0), 1e-14);
}

TEST(TotalPotential, CollisionThrows) {
    const auto config = SystemConfig::equal_masses(2, 2, 0.5, default_family());
    const std::vector<double> q{0.3, 0.1, 0.3, 0.1};
    EXPECT_THROW(total_potential_and_forces(config, q), CollisionError);
}
