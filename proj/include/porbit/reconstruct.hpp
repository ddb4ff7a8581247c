#pragma once

// A critical point u of f with f(u) > 0 yields the T-periodic solution q(t) = u(t / T) of
//   m_i q_i'' + grad_i V(q) = 0,   1/2 sum m_i |q_i'|^2 + V(q) = h,
// with T^2 = (1/2 ||u||^2) / int_0^1 (h - V(u)) dt. Residuals are measured in loop time,
// where the equation of motion reads m_i u_i'' + T^2 grad_i V(u) = 0.

#include <cmath>
#include <cstddef>
#include <vector>

#include "porbit/action.hpp"
#include "porbit/error.hpp"
#include "porbit/loop_space.hpp"
#include "porbit/solver.hpp"
#include "porbit/system.hpp"

namespace porbit {

struct ResidualReport {
    /// ||m u'' + T^2 grad V(u)||_2 / ||m u''||_2 over the grid.
    double ode = 0.0;
    /// max_t |E(t) - h| / |h|.
    double energy = 0.0;
    /// |q(T) - q(0)|.
    double periodicity = 0.0;
    std::size_t nodes = 0;
};

struct OrbitSolution {
    double period = 0.0;
    double energy = 0.0;
    Loop loop;
    std::vector<double> times;
    NodeValues positions;
    NodeValues velocities;
    std::vector<double> energy_series;
    ResidualReport residuals;
};

/// Verification uses a grid four times finer than the solver grid.
inline SampleGrid verification_grid(const SampleGrid& solver_grid) { return SampleGrid(4 * solver_grid.size()); }

/// Period from the frozen loop without checking criticality.
inline double period_of(const Loop& loop, const SystemConfig& config, const SampleGrid& grid) {
    const ActionEvaluation eval = action_value(loop, config, grid);
    if (!(eval.kinetic_half > 0.0)) throw InvalidArgument("period: constant loop has no period");
    return std::sqrt(eval.kinetic_half / eval.potential_integral);
}

inline double period(const CriticalPoint& cp, const SystemConfig& config, const SampleGrid& grid) {
    if (!cp.converged) throw InvalidArgument("period: critical point did not converge");
    if (!(cp.f_value > 0.0)) throw InvalidArgument("period: requires f > 0");
    return period_of(cp.loop, config, grid);
}

inline ResidualReport verify_orbit(const OrbitSolution& orbit, const SystemConfig& config, const SampleGrid& grid) {
    const Loop& loop = orbit.loop;
    config.require_compatible(loop);
    require_resolved(loop, grid);
    const SpectralBasis basis(loop.harmonic_count(), grid);
    NodeValues u, du, ddu;
    basis.synthesize(loop, 0, u);
    basis.synthesize(loop, 1, du);
    basis.synthesize(loop, 2, ddu);

    const double t2 = orbit.period * orbit.period;
    const std::size_t dim = config.dimension();
    double res2 = 0.0, ref2 = 0.0, energy_dev = 0.0;
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const auto pf = total_potential_and_forces(config, u.at(m));
        double kinetic = 0.0;
        for (std::size_t i = 0; i < config.n_bodies(); ++i) {
            for (std::size_t d = 0; d < dim; ++d) {
                const std::size_t q = i * dim + d;
                const double inertial = config.mass(i) * ddu.at(m)[q];
                const double r = inertial + t2 * pf.gradient[q];
                res2 += r * r;
                ref2 += inertial * inertial;
                kinetic += 0.5 * config.mass(i) * du.at(m)[q] * du.at(m)[q];
            }
        }
        const double e = kinetic / t2 + pf.value;
        energy_dev = std::max(energy_dev, std::abs(e - config.energy()));
    }
    ResidualReport report;
    report.nodes = grid.size();
    report.ode = ref2 > 0.0 ? std::sqrt(res2 / ref2) : std::sqrt(res2);
    report.energy = energy_dev / std::abs(config.energy());
    const auto q0 = loop.position_at(0.0), q1 = loop.position_at(1.0);
    double gap = 0.0;
    for (std::size_t q = 0; q < q0.size(); ++q) gap += (q1[q] - q0[q]) * (q1[q] - q0[q]);
    report.periodicity = std::sqrt(gap);
    return report;
}

/// Samples q(t) = u(t / T) at `samples` equally spaced times in [0, T) and attaches residuals
/// measured on the verification grid of `solver_grid`.
inline OrbitSolution to_orbit(const CriticalPoint& cp, const SystemConfig& config, double T, std::size_t samples,
                              const SampleGrid& solver_grid) {
    if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("to_orbit: period must be positive");
    if (samples < 2 || samples % 2 != 0) throw InvalidArgument("to_orbit: sample count must be even and >= 2");
    OrbitSolution orbit;
    orbit.period = T;
    orbit.energy = config.energy();
    orbit.loop = cp.loop;

    const SpectralBasis basis(cp.loop.harmonic_count(), SampleGrid(samples));
    basis.synthesize(cp.loop, 0, orbit.positions);
    basis.synthesize(cp.loop, 1, orbit.velocities);
    for (auto& v : orbit.velocities.data) v /= T;

    const std::size_t dim = config.dimension();
    orbit.times.resize(samples);
    orbit.energy_series.resize(samples);
    for (std::size_t s = 0; s < samples; ++s) {
        orbit.times[s] = T * static_cast<double>(s) / static_cast<double>(samples);
        double kinetic = 0.0;
        for (std::size_t i = 0; i < config.n_bodies(); ++i) {
            for (std::size_t d = 0; d < dim; ++d) {
                const double v = orbit.velocities.at(s)[i * dim + d];
                kinetic += 0.5 * config.mass(i) * v * v;
            }
        }
        orbit.energy_series[s] = kinetic + total_potential_and_forces(config, orbit.positions.at(s)).value;
    }
    orbit.residuals = verify_orbit(orbit, config, verification_grid(solver_grid));
    return orbit;
}

}  // namespace porbit
