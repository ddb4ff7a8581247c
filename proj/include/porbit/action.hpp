#pragma once

// Fixed-energy functional on the loop space
//
//   f(u) = 1/2 ||u||^2 * int_0^1 (h - V(u(t))) dt,    ||u||^2 = int_0^1 sum_i m_i |u_i'|^2 dt.
//
// The kinetic factor is exact (Parseval); the potential integral is the M-node rectangle
// rule, which is spectrally accurate for periodic integrands. The gradient is the exact
// derivative of this discrete objective with respect to the Fourier coefficients.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "porbit/error.hpp"
#include "porbit/loop_space.hpp"
#include "porbit/system.hpp"

namespace porbit {

/// Separations at or below this count as a collision.
inline constexpr double collision_floor = 1e-12;

struct ActionEvaluation {
    double f_value = 0.0;
    double kinetic_half = 0.0;        // 1/2 ||u||^2
    double potential_integral = 0.0;  // int_0^1 (h - V(u)) dt
    /// df/d(coefficient), laid out as [cos block | sin block], each (harmonic, body, dim).
    std::vector<double> gradient;
    /// Norm of the gradient dual to the ||.|| inner product on coefficient space.
    double gradient_norm = 0.0;
    double min_separation = 0.0;
};

/// Reusable evaluator for one (system, K, grid) triple. Holds the trig tables.
class ActionEvaluator {
public:
    ActionEvaluator(const SystemConfig& config, std::size_t harmonics, const SampleGrid& grid)
        : config_(config), grid_(grid), basis_(harmonics, grid) {
        if (!grid.resolves(Loop::harmonic(harmonics - 1))) {
            throw AliasingError("ActionEvaluator: grid of " + std::to_string(grid.size()) +
                                " nodes cannot resolve " + std::to_string(harmonics) + " odd harmonics");
        }
        const std::size_t stride = config.n_bodies() * config.dimension();
        metric_.resize(harmonics * stride);
        for (std::size_t j = 0; j < harmonics; ++j) {
            const double w = two_pi * Loop::harmonic(j);
            for (std::size_t i = 0; i < config.n_bodies(); ++i) {
                for (std::size_t d = 0; d < config.dimension(); ++d) {
                    metric_[j * stride + i * config.dimension() + d] = config.mass(i) * w * w / 2.0;
                }
            }
        }
    }

    const SystemConfig& config() const noexcept { return config_; }
    const SampleGrid& grid() const noexcept { return grid_; }
    std::size_t harmonics() const noexcept { return basis_.harmonics(); }
    /// Diagonal of the ||.||^2 quadratic form on one coefficient block: m_i (2 pi k)^2 / 2.
    std::span<const double> metric() const noexcept { return metric_; }

    /// Returns nullopt when a grid separation is at or below `floor` or the value is not finite.
    std::optional<ActionEvaluation> try_evaluate(const Loop& loop, bool with_gradient,
                                                 double floor = collision_floor) const {
        config_.require_compatible(loop);
        if (loop.harmonic_count() != basis_.harmonics()) {
            throw InvalidArgument("ActionEvaluator: loop harmonic count differs from evaluator");
        }
        const std::size_t n = config_.n_bodies(), dim = config_.dimension();
        const std::size_t m_nodes = grid_.size();
        NodeValues positions;
        basis_.synthesize(loop, 0, positions);
        NodeValues forces(m_nodes, n, dim);

        ActionEvaluation out;
        double min_sep = std::numeric_limits<double>::infinity();
        long double v_sum = 0.0L;
        for (std::size_t m = 0; m < m_nodes; ++m) {
            double v = 0.0;
            if (!detail::accumulate_potential(config_.potential(), n, dim, positions.at(m).data(),
                                              forces.at(m).data(), v, min_sep, floor)) {
                return std::nullopt;
            }
            v_sum += v;
        }
        out.min_separation = min_sep;

        double norm2 = 0.0;
        const auto a = loop.cos_coeffs(), b = loop.sin_coeffs();
        for (std::size_t q = 0; q < metric_.size(); ++q) norm2 += metric_[q] * (a[q] * a[q] + b[q] * b[q]);
        out.kinetic_half = 0.5 * norm2;
        out.potential_integral = config_.energy() - static_cast<double>(v_sum / static_cast<long double>(m_nodes));
        out.f_value = out.kinetic_half * out.potential_integral;
        if (!std::isfinite(out.f_value)) return std::nullopt;

        if (with_gradient) {
            const std::size_t block = metric_.size();
            out.gradient.assign(2 * block, 0.0);
            std::span<double> gc(out.gradient.data(), block), gs(out.gradient.data() + block, block);
            basis_.project(forces, gc, gs);
            double dual2 = 0.0;
            for (std::size_t q = 0; q < block; ++q) {
                gc[q] = out.potential_integral * metric_[q] * a[q] - out.kinetic_half * gc[q];
                gs[q] = out.potential_integral * metric_[q] * b[q] - out.kinetic_half * gs[q];
                dual2 += (gc[q] * gc[q] + gs[q] * gs[q]) / metric_[q];
            }
            out.gradient_norm = std::sqrt(dual2);
            if (!std::isfinite(out.gradient_norm)) return std::nullopt;
        }
        return out;
    }

    /// Throws CollisionError when a grid separation is at or below the collision floor.
    ActionEvaluation evaluate(const Loop& loop, bool with_gradient) const {
        auto result = try_evaluate(loop, with_gradient);
        if (!result) {
            throw CollisionError("action: loop collides on the sample grid (separation <= " +
                                     std::to_string(collision_floor) + ")",
                                 min_separation(loop, grid_));
        }
        return *std::move(result);
    }

    /// Gradient norm dual to ||.|| for a raw coefficient gradient.
    double dual_norm(std::span<const double> gradient) const {
        const std::size_t block = metric_.size();
        double sum = 0.0;
        for (std::size_t q = 0; q < block; ++q) {
            sum += (gradient[q] * gradient[q] + gradient[block + q] * gradient[block + q]) / metric_[q];
        }
        return std::sqrt(sum);
    }

private:
    SystemConfig config_;
    SampleGrid grid_;
    SpectralBasis basis_;
    std::vector<double> metric_;
};

/// Value fields only; gradient left empty.
inline ActionEvaluation action_value(const Loop& loop, const SystemConfig& config, const SampleGrid& grid) {
    return ActionEvaluator(config, loop.harmonic_count(), grid).evaluate(loop, false);
}

inline std::vector<double> action_gradient(const Loop& loop, const SystemConfig& config, const SampleGrid& grid) {
    return ActionEvaluator(config, loop.harmonic_count(), grid).evaluate(loop, true).gradient;
}

/// Gradient of the discrete f in the enlarged space of all harmonics 0..max_harmonic
/// (even ones included), evaluated at a loop of the symmetric space. Layout:
/// [harmonic k][cos, sin][body][dim]; the k = 0 sin slot is zero.
inline std::vector<double> unconstrained_gradient(const Loop& loop, const SystemConfig& config,
                                                  const SampleGrid& grid, int max_harmonic) {
    config.require_compatible(loop);
    if (!grid.resolves(std::max(max_harmonic, loop.largest_harmonic()))) {
        throw AliasingError("unconstrained_gradient: grid too coarse for requested harmonics");
    }
    const std::size_t n = config.n_bodies(), dim = config.dimension(), stride = n * dim;
    const ActionEvaluation base = action_value(loop, config, grid);
    const auto samples = evaluate(loop, grid);
    std::vector<double> force(stride);
    std::vector<double> out(static_cast<std::size_t>(max_harmonic + 1) * 2 * stride, 0.0);
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const auto p = total_potential_and_forces(config, samples.positions.at(m));
        for (int k = 0; k <= max_harmonic; ++k) {
            const double phase = two_pi * static_cast<double>((static_cast<std::size_t>(k) * m) % grid.size()) /
                                 static_cast<double>(grid.size());
            const double c = std::cos(phase), s = std::sin(phase);
            double* oc = out.data() + static_cast<std::size_t>(k) * 2 * stride;
            for (std::size_t q = 0; q < stride; ++q) {
                oc[q] -= base.kinetic_half * p.gradient[q] * c * grid.weight();
                oc[stride + q] -= base.kinetic_half * p.gradient[q] * s * grid.weight();
            }
        }
    }
    for (int k = 1; k <= max_harmonic; k += 2) {
        const auto j = static_cast<std::size_t>((k - 1) / 2);
        if (j >= loop.harmonic_count()) break;
        const double w = two_pi * k;
        double* oc = out.data() + static_cast<std::size_t>(k) * 2 * stride;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < dim; ++d) {
                const double metric = config.mass(i) * w * w / 2.0;
                oc[i * dim + d] += base.potential_integral * metric * loop.cos_coeff(j, i, d);
                oc[stride + i * dim + d] += base.potential_integral * metric * loop.sin_coeff(j, i, d);
            }
        }
    }
    return out;
}

/// max over nodes and bodies of |u_i(t)|.
inline double sup_norm(const Loop& loop, const SampleGrid& grid) {
    const auto samples = evaluate(loop, grid);
    double best = 0.0;
    for (std::size_t m = 0; m < grid.size(); ++m) {
        for (std::size_t i = 0; i < loop.n_bodies(); ++i) {
            double r2 = 0.0;
            for (double v : samples.positions.at(m, i)) r2 += v * v;
            best = std::max(best, r2);
        }
    }
    return std::sqrt(best);
}

/// Empirical embedding constant: 1.5 x max of |u|_inf / ||u|| over seeded random loops
/// (each truncated to a random number of harmonics).
inline double estimate_k_inf(const SystemConfig& config, std::size_t harmonics, const SampleGrid& grid,
                             std::size_t samples = 64, std::uint64_t seed = 0x5eed) {
    std::mt19937_64 rng(seed);
    double ratio = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t active = 1 + rng() % harmonics;
        const Loop loop = with_harmonics(random_loop(config.n_bodies(), config.dimension(), active, 1.0, rng()),
                                         harmonics);
        const double norm = h1_norm(loop, config);
        if (norm > 0.0) ratio = std::max(ratio, sup_norm(loop, grid) / norm);
    }
    return 1.5 * ratio;
}

struct LSParameters {
    double gamma = 0.0;  // 0: twice the smallest admissible value
    double beta = 0.0;   // 0: (theta + 2)/2 + 0.1, kept inside (0, 1)
    double k_inf = 0.0;  // 0: estimate_k_inf
    /// |f - g| <= level_tolerance * (1 + |f|) counts as being on the level set {f = g}.
    double level_tolerance = 1e-6;
};

/// Comparison functional g(u) = gamma ||u||^{theta+2} and the gradient lower bound
///   ||f'(u)|| >= [2 gamma - N(N-1) c 2^{theta-2} k_inf^theta] ||u||^{theta+1}.
struct LSDiagnostics {
    double gamma = 0.0;
    double beta = 0.0;
    double theta = 0.0;
    double norm = 0.0;
    double f_value = 0.0;
    double f_gradient_norm = 0.0;
    double g_value = 0.0;
    double g_gradient_norm = 0.0;  // gamma (theta + 2) ||u||^{theta+1}
    double k1 = 0.0;               // max ||u|| / p(u) over the sublevel sample
    double k_inf_est = 0.0;
    double lambda0 = 0.0;          // gamma (k1 r2)^{theta+2}
    double growth_bound_rhs = 0.0;
    bool on_level_set = false;
    bool above_lambda0 = false;
    /// beta ||f'|| - ||g'||; the gradient-dominance condition asks this to be >= 0 on {f = g >= lambda0}.
    double dominance_margin = 0.0;
    bool dominance_holds = false;
};

inline double ls_bound_constant(const SystemConfig& config, double k_inf) {
    const double n = static_cast<double>(config.n_bodies());
    const double theta = config.potential().theta();
    return n * (n - 1.0) * config.potential().c_bound() * std::pow(2.0, theta - 2.0) * std::pow(k_inf, theta);
}

inline LSDiagnostics ls_diagnostics(const Loop& loop, const SystemConfig& config, const SampleGrid& grid,
                                    LSParameters params = {}, std::span<const Loop> sublevel = {}) {
    LSDiagnostics out;
    const double theta = config.potential().theta();
    out.theta = theta;
    out.k_inf_est = params.k_inf > 0.0 ? params.k_inf : estimate_k_inf(config, loop.harmonic_count(), grid);
    const double lower = (theta + 2.0) / 2.0;
    out.beta = params.beta > 0.0 ? params.beta : lower + 0.1;
    if (out.beta >= 1.0) out.beta = 0.5 * (lower + 1.0);
    const double bound_constant = ls_bound_constant(config, out.k_inf_est);
    if (params.gamma > 0.0) {
        out.gamma = params.gamma;
    } else {
        // beta (2 gamma - D) > gamma (theta + 2)  <=>  gamma > beta D / (2 beta - theta - 2)
        const double gamma_min = out.beta * bound_constant / (2.0 * out.beta - theta - 2.0);
        out.gamma = gamma_min > 0.0 ? 2.0 * gamma_min : 1.0;
    }

    const ActionEvaluator evaluator(config, loop.harmonic_count(), grid);
    const ActionEvaluation eval = evaluator.evaluate(loop, true);
    out.norm = h1_norm(loop, config);
    out.f_value = eval.f_value;
    out.f_gradient_norm = eval.gradient_norm;
    out.g_value = out.gamma * std::pow(out.norm, theta + 2.0);
    out.g_gradient_norm = out.gamma * (theta + 2.0) * std::pow(out.norm, theta + 1.0);

    out.k1 = eval.min_separation > 0.0 ? out.norm / eval.min_separation : 0.0;
    for (const Loop& sample : sublevel) {
        const double p = min_separation(sample, grid);
        if (p > 0.0) out.k1 = std::max(out.k1, h1_norm(sample, config) / p);
    }
    out.lambda0 = out.gamma * std::pow(out.k1 * config.potential().r2(), theta + 2.0);
    out.growth_bound_rhs = (2.0 * out.gamma - bound_constant) * std::pow(out.norm, theta + 1.0);
    out.on_level_set = std::abs(out.f_value - out.g_value) <= params.level_tolerance * (1.0 + std::abs(out.f_value));
    out.above_lambda0 = out.f_value >= out.lambda0;
    out.dominance_margin = out.beta * out.f_gradient_norm - out.g_gradient_norm;
    out.dominance_holds = out.dominance_margin >= 0.0;
    return out;
}

}  // namespace porbit
