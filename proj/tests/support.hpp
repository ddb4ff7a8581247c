#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "porbit/porbit.hpp"

namespace porbit::testing {

inline PotentialFamily default_family() { return build_family(3.0, -1.0, 0.5, 1.5); }

/// u_1 = R (cos 2 pi t, sin 2 pi t), u_2 = -u_1, padded to `harmonics`.
inline Loop circle(double radius, std::size_t harmonics = 1) {
    std::vector<double> a(harmonics * 4, 0.0), b(harmonics * 4, 0.0);
    a[0] = radius;
    b[1] = radius;
    a[2] = -radius;
    b[3] = -radius;
    return make_loop(2, 2, harmonics, a, b);
}

/// Separation radius of the circular two-body orbit in the pure inner law: 2 R* solves
/// (2R)^{-alpha} = 2h / (alpha - 2).
inline double circular_radius(double alpha, double h) { return 0.5 * std::pow((alpha - 2.0) / (2.0 * h), 1.0 / alpha); }

inline double circular_period(double alpha, double h) {
    return 2.0 * std::numbers::pi * circular_radius(alpha, h) * std::sqrt((alpha - 2.0) / (h * alpha));
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace porbit::testing
