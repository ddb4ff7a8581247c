#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "porbit/action.hpp"
#include "porbit/error.hpp"
#include "porbit/loop_space.hpp"
#include "porbit/system.hpp"

namespace porbit {

/// How multistart draws its initial loops.
enum class Seeding {
    /// Random loops truncated to 1..4 harmonics.
    random,
    /// Cycles random, harmonic-boosted random and choreography starts.
    mixed,
};

struct SolverSettings {
    std::size_t max_iterations = 2000;
    /// Converged when the dual gradient norm is at most gradient_tolerance * (1 + |f|).
    double gradient_tolerance = 1e-8;
    double sufficient_decrease = 1e-4;
    double backtracking = 0.5;
    std::size_t memory = 10;
    std::size_t starts = 20;
    std::uint64_t seed = 1;
    /// Base amplitude of random starts; each start draws a factor in [0.5, 1.5].
    double amplitude = 1.0;
    double dedup_action_gap = 1e-3;
    double dedup_distance = 1e-2;
    /// Trial steps whose grid separation drops to this value are rejected.
    double separation_guard = 1e-9;
    std::size_t workers = 1;
    Seeding seeding = Seeding::mixed;
    /// Embedding constant for LS diagnostics; 0 estimates it.
    double k_inf = 0.0;

    void validate() const {
        if (max_iterations == 0) throw InvalidArgument("solver: max_iterations must be positive");
        if (!(gradient_tolerance > 0.0)) throw InvalidArgument("solver: gradient_tolerance must be positive");
        if (!(sufficient_decrease > 0.0 && sufficient_decrease < 1.0)) {
            throw InvalidArgument("solver: sufficient_decrease must lie in (0, 1)");
        }
        if (!(backtracking > 0.0 && backtracking < 1.0)) throw InvalidArgument("solver: backtracking must lie in (0, 1)");
        if (memory == 0) throw InvalidArgument("solver: memory must be positive");
        if (starts == 0) throw InvalidArgument("solver: starts must be at least 1");
        if (!(amplitude > 0.0)) throw InvalidArgument("solver: amplitude must be positive");
        if (!(dedup_action_gap > 0.0) || !(dedup_distance > 0.0)) {
            throw InvalidArgument("solver: deduplication thresholds must be positive");
        }
        if (!(separation_guard > 0.0)) throw InvalidArgument("solver: separation_guard must be positive");
    }
};

struct CriticalPoint {
    Loop loop;
    double f_value = 0.0;
    double gradient_norm = 0.0;
    double p_value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    LSDiagnostics ls;
    std::size_t start_index = 0;
    std::uint64_t seed = 0;
    /// f at every accepted iterate, starting with the initial loop.
    std::vector<double> f_history;
    /// Grid separation at every accepted iterate.
    std::vector<double> p_history;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t q = 0; q < a.size(); ++q) s += a[q] * b[q];
    return s;
}

}  // namespace detail

/// Limited-memory quasi-Newton descent with backtracking, run in coordinates x = sqrt(w) c
/// where ||u||^2 = sum w c^2. The line search never accepts an iterate that leaves the
/// collision-free set on the grid.
inline CriticalPoint minimize(const Loop& start, const SystemConfig& config, const SampleGrid& grid,
                              const SolverSettings& settings) {
    settings.validate();
    config.require_compatible(start);
    const ActionEvaluator evaluator(config, start.harmonic_count(), grid);
    auto current = evaluator.try_evaluate(start, true, settings.separation_guard);
    if (!current) {
        throw CollisionError("minimize: start loop collides on the grid or has non-finite action",
                             min_separation(start, grid));
    }

    const std::size_t block = start.block_size();
    std::vector<double> sqrt_w(2 * block);
    for (std::size_t q = 0; q < block; ++q) sqrt_w[q] = sqrt_w[block + q] = std::sqrt(evaluator.metric()[q]);

    auto to_x = [&](const Loop& loop) {
        std::vector<double> x(2 * block);
        for (std::size_t q = 0; q < block; ++q) {
            x[q] = sqrt_w[q] * loop.cos_coeffs()[q];
            x[block + q] = sqrt_w[block + q] * loop.sin_coeffs()[q];
        }
        return x;
    };
    auto to_loop = [&](const std::vector<double>& x) {
        std::vector<double> a(block), b(block);
        for (std::size_t q = 0; q < block; ++q) {
            a[q] = x[q] / sqrt_w[q];
            b[q] = x[block + q] / sqrt_w[block + q];
        }
        return make_loop(start.n_bodies(), start.dimension(), start.harmonic_count(), a, b);
    };
    auto to_gx = [&](const std::vector<double>& g) {
        std::vector<double> gx(g.size());
        for (std::size_t q = 0; q < g.size(); ++q) gx[q] = g[q] / sqrt_w[q];
        return gx;
    };

    CriticalPoint cp;
    cp.loop = start;
    std::vector<double> x = to_x(start);
    std::vector<double> gx = to_gx(current->gradient);
    cp.f_history.push_back(current->f_value);
    cp.p_history.push_back(current->min_separation);

    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    bool converged = false;
    bool just_reset = false;

    while (true) {
        const double tol = settings.gradient_tolerance * (1.0 + std::abs(current->f_value));
        if (current->gradient_norm <= tol) {
            converged = true;
            break;
        }
        if (cp.iterations >= settings.max_iterations) break;

        // Two-loop recursion.
        std::vector<double> d = gx;
        std::vector<double> alpha(s_hist.size());
        for (std::size_t h = s_hist.size(); h-- > 0;) {
            alpha[h] = rho_hist[h] * detail::dot(s_hist[h], d);
            for (std::size_t q = 0; q < d.size(); ++q) d[q] -= alpha[h] * y_hist[h][q];
        }
        if (!s_hist.empty()) {
            const double scale = detail::dot(s_hist.back(), y_hist.back()) / detail::dot(y_hist.back(), y_hist.back());
            for (auto& v : d) v *= scale;
        }
        for (std::size_t h = 0; h < s_hist.size(); ++h) {
            const double beta = rho_hist[h] * detail::dot(y_hist[h], d);
            for (std::size_t q = 0; q < d.size(); ++q) d[q] += (alpha[h] - beta) * s_hist[h][q];
        }
        for (auto& v : d) v = -v;
        double slope = detail::dot(gx, d);
        if (!(slope < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            d = gx;
            for (auto& v : d) v = -v;
            slope = -detail::dot(gx, gx);
        }

        const double x_norm = std::sqrt(detail::dot(x, x));
        const double d_norm = std::sqrt(detail::dot(d, d));
        double step = 1.0;
        if (s_hist.empty()) step = std::min(1.0, 0.1 * std::max(x_norm, 1.0) / d_norm);
        // A single step may not move the loop by more than its own size.
        if (step * d_norm > std::max(x_norm, 1e-8)) step = std::max(x_norm, 1e-8) / d_norm;

        std::optional<ActionEvaluation> trial;
        std::vector<double> x_trial(x.size());
        bool accepted = false;
        for (int bt = 0; bt < 80; ++bt) {
            for (std::size_t q = 0; q < x.size(); ++q) x_trial[q] = x[q] + step * d[q];
            trial = evaluator.try_evaluate(to_loop(x_trial), true, settings.separation_guard);
            if (trial) {
                const double predicted = settings.sufficient_decrease * step * slope;
                const bool armijo = trial->f_value <= current->f_value + predicted;
                // Near convergence the predicted decrease drops below the rounding level of f.
                const bool at_rounding = std::abs(predicted) <= 64.0 * eps * std::abs(current->f_value) &&
                                         trial->f_value <= current->f_value;
                if (armijo || at_rounding) {
                    accepted = true;
                    break;
                }
            }
            step *= settings.backtracking;
        }
        if (!accepted) {
            if (just_reset || s_hist.empty()) break;
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            just_reset = true;
            continue;
        }
        just_reset = false;

        std::vector<double> gx_trial = to_gx(trial->gradient);
        std::vector<double> s(x.size()), y(x.size());
        for (std::size_t q = 0; q < x.size(); ++q) {
            s[q] = x_trial[q] - x[q];
            y[q] = gx_trial[q] - gx[q];
        }
        const double sy = detail::dot(s, y);
        if (sy > 1e-12 * std::sqrt(detail::dot(s, s) * detail::dot(y, y))) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (s_hist.size() > settings.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        x = std::move(x_trial);
        gx = std::move(gx_trial);
        current = std::move(trial);
        ++cp.iterations;
        cp.f_history.push_back(current->f_value);
        cp.p_history.push_back(current->min_separation);
    }

    cp.loop = to_loop(x);
    cp.f_value = current->f_value;
    cp.gradient_norm = current->gradient_norm;
    cp.p_value = current->min_separation;
    cp.converged = converged && cp.p_value > 0.0 && cp.f_value > 0.0;
    LSParameters ls_params;
    ls_params.k_inf = settings.k_inf;
    cp.ls = ls_diagnostics(cp.loop, config, grid, ls_params);
    return cp;
}

namespace detail {

inline Loop scale_harmonics(const Loop& loop, const std::vector<double>& factors) {
    const std::size_t stride = loop.n_bodies() * loop.dimension();
    std::vector<double> a(loop.cos_coeffs().begin(), loop.cos_coeffs().end());
    std::vector<double> b(loop.sin_coeffs().begin(), loop.sin_coeffs().end());
    for (std::size_t q = 0; q < a.size(); ++q) {
        a[q] *= factors[q / stride];
        b[q] *= factors[q / stride];
    }
    return make_loop(loop.n_bodies(), loop.dimension(), loop.harmonic_count(), a, b);
}

/// Body i follows the single-body `curve` shifted in time by i / N.
inline Loop choreography(const Loop& curve, std::size_t n_bodies) {
    const std::size_t dim = curve.dimension(), harmonics = curve.harmonic_count();
    std::vector<double> a(harmonics * n_bodies * dim), b(a.size());
    for (std::size_t i = 0; i < n_bodies; ++i) {
        const Loop shifted = time_shift(curve, static_cast<double>(i) / static_cast<double>(n_bodies));
        for (std::size_t j = 0; j < harmonics; ++j) {
            for (std::size_t d = 0; d < dim; ++d) {
                a[(j * n_bodies + i) * dim + d] = shifted.cos_coeff(j, 0, d);
                b[(j * n_bodies + i) * dim + d] = shifted.sin_coeff(j, 0, d);
            }
        }
    }
    return make_loop(n_bodies, dim, harmonics, a, b);
}

}  // namespace detail

/// Initial loop used by multistart for start number `index`. Every style starts from
/// random_loop with an amplitude factor in [0.5, 1.5]:
///   0: truncated to 1..min(K, 4) harmonics;
///   1: 2..min(K, 4) harmonics with one higher harmonic raised to the level of the first;
///   2: choreography (bodies on one random curve, phase-shifted by 1/N) dominated by one harmonic.
/// Seeding::random uses style 0 only; Seeding::mixed cycles 0, 1, 2. Draws landing within
/// 1e-2 * amplitude of a grid collision are redrawn.
inline Loop multistart_start(const SystemConfig& config, std::size_t harmonics, const SampleGrid& grid,
                             const SolverSettings& settings, std::size_t index) {
    std::mt19937_64 rng(detail::splitmix64(settings.seed ^ detail::splitmix64(index)));
    const std::size_t max_active = std::min<std::size_t>(harmonics, 4);
    std::size_t style = settings.seeding == Seeding::mixed ? index % 3 : 0;
    if (max_active < 2 && style == 1) style = 0;
    Loop loop;
    for (int attempt = 0; attempt < 16; ++attempt) {
        const double amplitude = settings.amplitude * std::uniform_real_distribution<double>(0.5, 1.5)(rng);
        if (style == 0) {
            const std::size_t active = 1 + rng() % max_active;
            loop = random_loop(config.n_bodies(), config.dimension(), active, amplitude, rng());
        } else if (style == 1) {
            const std::size_t active = 2 + rng() % (max_active - 1);
            const std::size_t boost = 1 + rng() % (active - 1);
            std::vector<double> factors(active, 1.0);
            factors[boost] = Loop::harmonic(boost) * Loop::harmonic(boost);
            loop = detail::scale_harmonics(
                random_loop(config.n_bodies(), config.dimension(), active, amplitude, rng()), factors);
        } else {
            const std::size_t dominant = rng() % max_active;
            std::vector<double> factors(max_active, 0.1);
            factors[dominant] = Loop::harmonic(dominant) * Loop::harmonic(dominant);
            const Loop curve = detail::scale_harmonics(
                random_loop(1, config.dimension(), max_active, amplitude, rng()), factors);
            loop = detail::choreography(curve, config.n_bodies());
        }
        loop = with_harmonics(loop, harmonics);
        if (min_separation(loop, grid) > 1e-2 * amplitude) break;
    }
    return loop;
}

/// Relative action gap |f_a - f_b| / max(|f_a|, |f_b|).
inline double action_gap(double fa, double fb) {
    const double scale = std::max(std::abs(fa), std::abs(fb));
    return scale > 0.0 ? std::abs(fa - fb) / scale : 0.0;
}

/// Drops points that match an earlier (lower-action) point in both action and loop_distance.
inline std::vector<CriticalPoint> deduplicate(std::vector<CriticalPoint> points, const SampleGrid& grid,
                                              double action_threshold, double distance_threshold) {
    std::sort(points.begin(), points.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
        if (a.f_value != b.f_value) return a.f_value < b.f_value;
        return a.start_index < b.start_index;
    });
    std::vector<CriticalPoint> kept;
    for (auto& p : points) {
        const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const CriticalPoint& q) {
            return action_gap(p.f_value, q.f_value) <= action_threshold &&
                   loop_distance(p.loop, q.loop, grid) <= distance_threshold;
        });
        if (!duplicate) kept.push_back(std::move(p));
    }
    return kept;
}

/// Runs minimize from `settings.starts` seeded random loops and returns the distinct
/// converged critical points sorted by action. `harmonics` is the truncation K.
inline std::vector<CriticalPoint> multistart(const SystemConfig& config, std::size_t harmonics,
                                             const SampleGrid& grid, const SolverSettings& settings) {
    settings.validate();
    SolverSettings run = settings;
    if (run.k_inf <= 0.0) run.k_inf = estimate_k_inf(config, harmonics, grid);

    std::vector<std::optional<CriticalPoint>> results(settings.starts);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t s = next++; s < settings.starts; s = next++) {
            const Loop start = multistart_start(config, harmonics, grid, run, s);
            try {
                CriticalPoint cp = minimize(start, config, grid, run);
                cp.start_index = s;
                cp.seed = settings.seed;
                results[s] = std::move(cp);
            } catch (const CollisionError&) {
                // start could not be placed off the collision set; skipped
            }
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(settings.workers, 1, settings.starts);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    std::vector<CriticalPoint> converged;
    for (auto& r : results) {
        if (r && r->converged) converged.push_back(std::move(*r));
    }
    return deduplicate(std::move(converged), grid, settings.dedup_action_gap, settings.dedup_distance);
}

}  // namespace porbit
