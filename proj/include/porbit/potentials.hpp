#pragma once

// Radial strong-force pair potential
//
//   V(s) = -s^{-alpha}                                   0 < s <= r1
//          -(1 - S(x)) s^{-alpha} - S(x) s^{theta}        r1 < s < r2,   x = (s - r1) / (r2 - r1)
//          -s^{theta}                                    s >= r2
//
// with alpha > 2 and -2 < theta < 0. S(x) = 1 / (1 + exp(1/x - 1/(1-x))) is a C-infinity step
// that is flat to all orders at both ends, so V is smooth and the blend is a convex
// combination of two negative laws.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "porbit/error.hpp"

namespace porbit {

class PotentialFamily {
public:
    static constexpr std::size_t blend_check_points = 1024;

    PotentialFamily() = default;

    double alpha() const noexcept { return alpha_; }
    double theta() const noexcept { return theta_; }
    double r1() const noexcept { return r1_; }
    double r2() const noexcept { return r2_; }
    /// Constant of the far-field bound s V'(s) <= c s^theta; |theta| is tight for the pure outer law.
    double c_bound() const noexcept { return c_bound_; }
    /// Weights of the inner and outer laws inside the blend; both 1 for a built family.
    const std::array<double, 2>& blend_weights() const noexcept { return weights_; }

    double value(double s) const noexcept {
        if (s <= r1_) return -std::pow(s, -alpha_);
        if (s >= r2_) return -std::pow(s, theta_);
        const double w = step((s - r1_) / (r2_ - r1_));
        return -(1.0 - w) * weights_[0] * std::pow(s, -alpha_) - w * weights_[1] * std::pow(s, theta_);
    }

    /// dV/ds.
    double derivative(double s) const noexcept {
        if (s <= r1_) return alpha_ * std::pow(s, -alpha_ - 1.0);
        if (s >= r2_) return -theta_ * std::pow(s, theta_ - 1.0);
        const double x = (s - r1_) / (r2_ - r1_);
        const double w = step(x);
        const double dw = w * (1.0 - w) * (1.0 / (x * x) + 1.0 / ((1.0 - x) * (1.0 - x))) / (r2_ - r1_);
        const double inner = weights_[0] * std::pow(s, -alpha_);
        const double outer = weights_[1] * std::pow(s, theta_);
        return dw * (inner - outer) + (1.0 - w) * alpha_ * inner / s - w * theta_ * outer / s;
    }

    /// Copy with replaced blend weights and no negativity check. Used to build negative
    /// controls for certify().
    PotentialFamily with_blend_weights(const std::array<double, 2>& weights) const {
        PotentialFamily copy = *this;
        copy.weights_ = weights;
        return copy;
    }

    friend PotentialFamily build_family(double alpha, double theta, double r1, double r2);

private:
    static double step(double x) noexcept { return 1.0 / (1.0 + std::exp(1.0 / x - 1.0 / (1.0 - x))); }

    double alpha_ = 3.0;
    double theta_ = -1.0;
    double r1_ = 0.5;
    double r2_ = 1.5;
    double c_bound_ = 1.0;
    std::array<double, 2> weights_{1.0, 1.0};
};

inline PotentialFamily build_family(double alpha, double theta, double r1, double r2) {
    if (!(alpha > 2.0) || !std::isfinite(alpha)) {
        throw InvalidArgument("potential: alpha must satisfy alpha > 2 (strong force), got " + std::to_string(alpha));
    }
    if (!(theta > -2.0 && theta < 0.0)) {
        throw InvalidArgument("potential: theta must satisfy -2 < theta < 0, got " + std::to_string(theta));
    }
    if (!(r1 > 0.0) || !(r2 > r1) || !std::isfinite(r2)) {
        throw InvalidArgument("potential: radii must satisfy 0 < r1 < r2");
    }
    PotentialFamily fam;
    fam.alpha_ = alpha;
    fam.theta_ = theta;
    fam.r1_ = r1;
    fam.r2_ = r2;
    fam.c_bound_ = std::abs(theta);

    for (std::size_t q = 0; q <= PotentialFamily::blend_check_points; ++q) {
        const double s = r1 + (r2 - r1) * static_cast<double>(q) / PotentialFamily::blend_check_points;
        if (!(fam.value(s) < 0.0)) {
            std::ostringstream msg;
            msg << "potential: blend is non-negative at s = " << s << " (V = " << fam.value(s) << ")";
            throw BlendNegativityError(msg.str(), s);
        }
    }
    return fam;
}

inline double pair_value(const PotentialFamily& fam, double s) {
    if (!(s > 0.0)) throw InvalidArgument("pair_value: separation must be positive");
    return fam.value(s);
}

/// grad V(xi) = V'(|xi|) xi / |xi|.
inline std::vector<double> pair_gradient(const PotentialFamily& fam, std::span<const double> xi) {
    double r2 = 0.0;
    for (double v : xi) r2 += v * v;
    if (!(r2 > 0.0)) throw InvalidArgument("pair_gradient: zero separation vector");
    const double r = std::sqrt(r2);
    const double scale = fam.derivative(r) / r;
    std::vector<double> out(xi.begin(), xi.end());
    for (auto& v : out) v *= scale;
    return out;
}

struct ConditionCheck {
    bool pass = true;
    /// Smallest slack seen (positive means satisfied); for structural checks, 0.
    double worst_margin = std::numeric_limits<double>::infinity();
    /// Separation where the worst margin occurs; for a failure this is the witness.
    double witness = std::numeric_limits<double>::quiet_NaN();
    bool structural = false;
};

struct ConditionReport {
    ConditionCheck nonpositive;     // V(s) <= 0 everywhere
    ConditionCheck inner_growth;    // <grad V(xi), xi> >= -alpha V(xi) for |xi| <= r1
    ConditionCheck outer_bound;     // <grad V(xi), xi> <= c |xi|^theta for |xi| >= r2
    ConditionCheck pair_symmetry;   // V_ij = V_ji
    ConditionCheck continuity;      // C^1 matching at r1 and r2

    bool all_pass() const noexcept {
        return nonpositive.pass && inner_growth.pass && outer_bound.pass && pair_symmetry.pass && continuity.pass;
    }
};

/// Geometric grid on [1e-3 r1, 10 r2] merged with a uniform grid on [r1, r2].
inline std::vector<double> default_certification_grid(const PotentialFamily& fam) {
    std::vector<double> grid;
    const double lo = 1e-3 * fam.r1(), hi = 10.0 * fam.r2();
    constexpr std::size_t geometric = 4096;
    for (std::size_t q = 0; q <= geometric; ++q) {
        grid.push_back(lo * std::pow(hi / lo, static_cast<double>(q) / geometric));
    }
    for (std::size_t q = 0; q <= PotentialFamily::blend_check_points; ++q) {
        grid.push_back(fam.r1() + (fam.r2() - fam.r1()) * static_cast<double>(q) / PotentialFamily::blend_check_points);
    }
    return grid;
}

namespace detail {
inline void record(ConditionCheck& check, double margin, double s) {
    if (margin < check.worst_margin) {
        check.worst_margin = margin;
        check.witness = s;
    }
    if (margin < 0.0) check.pass = false;
}
}  // namespace detail

/// Grid-based check of the potential hypotheses. Failures are report entries.
inline ConditionReport certify(const PotentialFamily& fam, std::span<const double> s_grid) {
    ConditionReport report;
    constexpr double slack = 1e-9;
    for (double s : s_grid) {
        if (!(s > 0.0)) continue;
        const double v = fam.value(s);
        const double dv = fam.derivative(s);
        detail::record(report.nonpositive, -v, s);
        if (s <= fam.r1()) {
            const double lhs = s * dv + fam.alpha() * v;
            detail::record(report.inner_growth, lhs + slack * std::max(1.0, std::abs(fam.alpha() * v)), s);
        }
        if (s >= fam.r2()) {
            const double bound = fam.c_bound() * std::pow(s, fam.theta());
            detail::record(report.outer_bound, bound - s * dv + slack * std::max(1.0, bound), s);
        }
    }
    report.pair_symmetry.structural = true;
    report.pair_symmetry.worst_margin = 0.0;

    // One-sided limits of the blend against the power laws at the radii.
    constexpr double c1_tol = 1e-10;
    const double width = fam.r2() - fam.r1();
    const double inside_r1 = fam.r1() + 1e-6 * width, inside_r2 = fam.r2() - 1e-6 * width;
    const double jumps[4][3] = {
        {fam.value(inside_r1), -std::pow(inside_r1, -fam.alpha()), fam.r1()},
        {fam.derivative(inside_r1), fam.alpha() * std::pow(inside_r1, -fam.alpha() - 1.0), fam.r1()},
        {fam.value(inside_r2), -std::pow(inside_r2, fam.theta()), fam.r2()},
        {fam.derivative(inside_r2), -fam.theta() * std::pow(inside_r2, fam.theta() - 1.0), fam.r2()},
    };
    for (const auto& jump : jumps) {
        const double rel = std::abs(jump[0] - jump[1]) / std::max(1.0, std::abs(jump[1]));
        detail::record(report.continuity, c1_tol - rel, jump[2]);
    }
    return report;
}

inline ConditionReport certify(const PotentialFamily& fam) {
    const auto grid = default_certification_grid(fam);
    return certify(fam, grid);
}

}  // namespace porbit
