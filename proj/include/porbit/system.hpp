#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "porbit/error.hpp"
#include "porbit/loop_space.hpp"
#include "porbit/potentials.hpp"

namespace porbit {

/// N bodies in R^n with masses, energy level h and a shared radial pair potential.
class SystemConfig {
public:
    SystemConfig(std::size_t n_bodies, std::size_t dimension, std::vector<double> masses, double energy,
                 PotentialFamily potential)
        : n_bodies_(n_bodies), dimension_(dimension), masses_(std::move(masses)), energy_(energy),
          potential_(potential) {
        if (n_bodies_ < 2) throw InvalidArgument("system: need at least two bodies");
        if (dimension_ < 1) throw InvalidArgument("system: dimension must be positive");
        if (masses_.size() != n_bodies_) {
            throw InvalidArgument("system: expected " + std::to_string(n_bodies_) + " masses, got " +
                                  std::to_string(masses_.size()));
        }
        for (double m : masses_) {
            if (!(m > 0.0) || !std::isfinite(m)) throw InvalidArgument("system: masses must be positive and finite");
        }
        if (!(energy_ > 0.0) || !std::isfinite(energy_)) {
            throw InvalidArgument("system: energy h must be positive and finite");
        }
        min_mass_ = *std::min_element(masses_.begin(), masses_.end());
    }

    /// Equal unit masses.
    static SystemConfig equal_masses(std::size_t n_bodies, std::size_t dimension, double energy,
                                     PotentialFamily potential) {
        return SystemConfig(n_bodies, dimension, std::vector<double>(n_bodies, 1.0), energy, potential);
    }

    std::size_t n_bodies() const noexcept { return n_bodies_; }
    std::size_t dimension() const noexcept { return dimension_; }
    std::span<const double> masses() const noexcept { return masses_; }
    double mass(std::size_t i) const { return masses_[i]; }
    double min_mass() const noexcept { return min_mass_; }
    double energy() const noexcept { return energy_; }
    const PotentialFamily& potential() const noexcept { return potential_; }

    SystemConfig with_energy(double energy) const {
        return SystemConfig(n_bodies_, dimension_, masses_, energy, potential_);
    }

    void require_compatible(const Loop& loop) const {
        if (loop.n_bodies() != n_bodies_ || loop.dimension() != dimension_) {
            throw InvalidArgument("loop shape (" + std::to_string(loop.n_bodies()) + " bodies, dim " +
                                  std::to_string(loop.dimension()) + ") does not match system");
        }
    }

private:
    std::size_t n_bodies_;
    std::size_t dimension_;
    std::vector<double> masses_;
    double energy_;
    PotentialFamily potential_;
    double min_mass_ = 0.0;
};

inline double h1_norm(const Loop& loop, const SystemConfig& config) { return h1_norm(loop, config.masses()); }

struct PotentialAndForces {
    double value = 0.0;
    /// dV/du_i, flattened as [body][dim].
    std::vector<double> gradient;
};

namespace detail {

/// Pair sum V = sum_{i<j} V(|x_i - x_j|) and its gradient written into `gradient`.
/// Returns false (leaving outputs unspecified) when some separation is below `floor`.
inline bool accumulate_potential(const PotentialFamily& fam, std::size_t n_bodies, std::size_t dim,
                                 const double* positions, double* gradient, double& value, double& min_sep,
                                 double floor) {
    value = 0.0;
    std::fill(gradient, gradient + n_bodies * dim, 0.0);
    double diff[8];
    std::vector<double> big;
    double* xi = diff;
    if (dim > 8) {
        big.resize(dim);
        xi = big.data();
    }
    for (std::size_t i = 0; i < n_bodies; ++i) {
        for (std::size_t j = i + 1; j < n_bodies; ++j) {
            double r2 = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                xi[d] = positions[i * dim + d] - positions[j * dim + d];
                r2 += xi[d] * xi[d];
            }
            const double r = std::sqrt(r2);
            min_sep = std::min(min_sep, r);
            if (!(r > floor)) return false;
            value += fam.value(r);
            const double scale = fam.derivative(r) / r;
            for (std::size_t d = 0; d < dim; ++d) {
                gradient[i * dim + d] += scale * xi[d];
                gradient[j * dim + d] -= scale * xi[d];
            }
        }
    }
    return true;
}

}  // namespace detail

/// Total potential and per-body gradient at one configuration (positions flattened [body][dim]).
inline PotentialAndForces total_potential_and_forces(const SystemConfig& config, std::span<const double> positions) {
    if (positions.size() != config.n_bodies() * config.dimension()) {
        throw InvalidArgument("total_potential_and_forces: expected N*n coordinates");
    }
    PotentialAndForces out;
    out.gradient.resize(positions.size());
    double min_sep = std::numeric_limits<double>::infinity();
    if (!detail::accumulate_potential(config.potential(), config.n_bodies(), config.dimension(), positions.data(),
                                      out.gradient.data(), out.value, min_sep, 0.0)) {
        throw CollisionError("total_potential_and_forces: coincident bodies", min_sep);
    }
    return out;
}

}  // namespace porbit
