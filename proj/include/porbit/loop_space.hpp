#pragma once

// Discretized symmetric loop space: 1-periodic paths of N bodies in R^n with
// u(t + 1/2) = -u(t), represented by truncated odd-harmonic Fourier series
//
//   u_i(t) = sum_{j<K} a_{j,i} cos(2 pi k_j t) + b_{j,i} sin(2 pi k_j t),   k_j = 2j + 1.
//
// Only odd harmonics appear, so antiperiodicity and zero mean hold by construction.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "porbit/error.hpp"

namespace porbit {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Element of the loop space. Immutable after construction.
class Loop {
public:
    Loop() = default;

    std::size_t n_bodies() const noexcept { return n_bodies_; }
    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t harmonic_count() const noexcept { return harmonics_; }
    /// Frequency of the j-th stored harmonic (always odd).
    static constexpr int harmonic(std::size_t j) noexcept { return static_cast<int>(2 * j + 1); }
    int largest_harmonic() const noexcept { return harmonic(harmonics_ - 1); }

    /// Number of coefficients in one of the cos/sin blocks: K * N * n.
    std::size_t block_size() const noexcept { return harmonics_ * n_bodies_ * dimension_; }
    std::size_t index(std::size_t j, std::size_t body, std::size_t dim) const noexcept {
        return (j * n_bodies_ + body) * dimension_ + dim;
    }

    std::span<const double> cos_coeffs() const noexcept { return cos_; }
    std::span<const double> sin_coeffs() const noexcept { return sin_; }
    double cos_coeff(std::size_t j, std::size_t body, std::size_t dim) const { return cos_[index(j, body, dim)]; }
    double sin_coeff(std::size_t j, std::size_t body, std::size_t dim) const { return sin_[index(j, body, dim)]; }

    /// Position of every body at an arbitrary time, flattened as [body][dim].
    std::vector<double> position_at(double t) const {
        std::vector<double> out(n_bodies_ * dimension_, 0.0);
        for (std::size_t j = 0; j < harmonics_; ++j) {
            const double phase = two_pi * harmonic(j) * t;
            const double c = std::cos(phase), s = std::sin(phase);
            for (std::size_t q = 0; q < out.size(); ++q) {
                out[q] += cos_[j * out.size() + q] * c + sin_[j * out.size() + q] * s;
            }
        }
        return out;
    }

    friend Loop make_loop(std::size_t, std::size_t, std::size_t, std::span<const double>, std::span<const double>);

private:
    std::size_t n_bodies_ = 0;
    std::size_t dimension_ = 0;
    std::size_t harmonics_ = 0;
    std::vector<double> cos_;
    std::vector<double> sin_;
};

/// Builds a loop from coefficient blocks laid out as (harmonic, body, dim).
inline Loop make_loop(std::size_t n_bodies, std::size_t dimension, std::size_t harmonics,
                      std::span<const double> cos_coeffs, std::span<const double> sin_coeffs) {
    if (n_bodies == 0 || dimension == 0 || harmonics == 0) {
        throw InvalidArgument("make_loop: N, n and K must all be positive");
    }
    const std::size_t expected = n_bodies * dimension * harmonics;
    if (cos_coeffs.size() != expected || sin_coeffs.size() != expected) {
        throw InvalidArgument("make_loop: coefficient arrays must have shape (K, N, n) = " +
                              std::to_string(expected) + " entries, got " + std::to_string(cos_coeffs.size()) +
                              " and " + std::to_string(sin_coeffs.size()));
    }
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(cos_coeffs.begin(), cos_coeffs.end(), finite) ||
        !std::all_of(sin_coeffs.begin(), sin_coeffs.end(), finite)) {
        throw InvalidArgument("make_loop: non-finite coefficient");
    }
    Loop loop;
    loop.n_bodies_ = n_bodies;
    loop.dimension_ = dimension;
    loop.harmonics_ = harmonics;
    loop.cos_.assign(cos_coeffs.begin(), cos_coeffs.end());
    loop.sin_.assign(sin_coeffs.begin(), sin_coeffs.end());
    return loop;
}

inline Loop zero_loop(std::size_t n_bodies, std::size_t dimension, std::size_t harmonics) {
    std::vector<double> zeros(n_bodies * dimension * harmonics, 0.0);
    return make_loop(n_bodies, dimension, harmonics, zeros, zeros);
}

/// Uniform nodes t_j = j / M on [0, 1) with weights 1 / M.
class SampleGrid {
public:
    explicit SampleGrid(std::size_t nodes = 128) : nodes_(nodes) {
        if (nodes_ < 2 || nodes_ % 2 != 0) {
            throw InvalidArgument("SampleGrid: node count must be even and at least 2");
        }
    }

    /// Smallest power of two satisfying the anti-aliasing rule for K odd harmonics.
    static SampleGrid for_harmonics(std::size_t harmonics) {
        std::size_t m = 2;
        while (m < 4 * static_cast<std::size_t>(Loop::harmonic(harmonics - 1))) m *= 2;
        return SampleGrid(m);
    }

    std::size_t size() const noexcept { return nodes_; }
    double node(std::size_t j) const noexcept { return static_cast<double>(j) / static_cast<double>(nodes_); }
    double weight() const noexcept { return 1.0 / static_cast<double>(nodes_); }
    bool resolves(int largest_harmonic) const noexcept {
        return nodes_ >= 4 * static_cast<std::size_t>(largest_harmonic);
    }

    bool operator==(const SampleGrid&) const = default;

private:
    std::size_t nodes_;
};

inline void require_resolved(const Loop& loop, const SampleGrid& grid) {
    if (!grid.resolves(loop.largest_harmonic())) {
        throw AliasingError("grid of " + std::to_string(grid.size()) + " nodes cannot resolve harmonic " +
                            std::to_string(loop.largest_harmonic()) + " (need at least " +
                            std::to_string(4 * loop.largest_harmonic()) + ")");
    }
}

/// Per-node values of an N-body path, flattened as [node][body][dim].
struct NodeValues {
    std::size_t nodes = 0;
    std::size_t n_bodies = 0;
    std::size_t dimension = 0;
    std::vector<double> data;

    NodeValues() = default;
    NodeValues(std::size_t m, std::size_t n_bodies_, std::size_t dim)
        : nodes(m), n_bodies(n_bodies_), dimension(dim), data(m * n_bodies_ * dim, 0.0) {}

    std::size_t stride() const noexcept { return n_bodies * dimension; }
    std::span<double> at(std::size_t node) { return {data.data() + node * stride(), stride()}; }
    std::span<const double> at(std::size_t node) const { return {data.data() + node * stride(), stride()}; }
    std::span<const double> at(std::size_t node, std::size_t body) const {
        return {data.data() + node * stride() + body * dimension, dimension};
    }
};

/// Cos/sin tables for K odd harmonics on an M-node grid. Synthesizes node values from
/// coefficients and projects node values back onto the harmonics (the exact adjoint of
/// synthesis up to the 1/M quadrature weight).
class SpectralBasis {
public:
    SpectralBasis(std::size_t harmonics, const SampleGrid& grid)
        : harmonics_(harmonics), nodes_(grid.size()), cos_(harmonics * grid.size()), sin_(harmonics * grid.size()) {
        for (std::size_t j = 0; j < harmonics_; ++j) {
            const auto k = static_cast<std::size_t>(Loop::harmonic(j));
            for (std::size_t m = 0; m < nodes_; ++m) {
                // Reduce k*m modulo M first so that table entries are exactly periodic.
                const double phase = two_pi * static_cast<double>((k * m) % nodes_) / static_cast<double>(nodes_);
                cos_[m * harmonics_ + j] = std::cos(phase);
                sin_[m * harmonics_ + j] = std::sin(phase);
            }
        }
    }

    std::size_t harmonics() const noexcept { return harmonics_; }
    std::size_t nodes() const noexcept { return nodes_; }
    double cos_at(std::size_t node, std::size_t j) const { return cos_[node * harmonics_ + j]; }
    double sin_at(std::size_t node, std::size_t j) const { return sin_[node * harmonics_ + j]; }

    /// order 0: positions, 1: first time derivative, 2: second time derivative.
    void synthesize(const Loop& loop, int order, NodeValues& out) const {
        const std::size_t stride = loop.n_bodies() * loop.dimension();
        out = NodeValues(nodes_, loop.n_bodies(), loop.dimension());
        const auto a = loop.cos_coeffs();
        const auto b = loop.sin_coeffs();
        for (std::size_t m = 0; m < nodes_; ++m) {
            double* row = out.data.data() + m * stride;
            for (std::size_t j = 0; j < harmonics_; ++j) {
                const double w = two_pi * Loop::harmonic(j);
                const double c = cos_at(m, j), s = sin_at(m, j);
                // Coefficients multiplying a and b in the order-th derivative of a cos + b sin.
                double cc = c, ss = s;
                switch (order) {
                    case 0: break;
                    case 1: cc = -w * s; ss = w * c; break;
                    case 2: cc = -w * w * c; ss = -w * w * s; break;
                    default: throw InvalidArgument("SpectralBasis: derivative order must be 0, 1 or 2");
                }
                const double* aj = a.data() + j * stride;
                const double* bj = b.data() + j * stride;
                for (std::size_t q = 0; q < stride; ++q) row[q] += aj[q] * cc + bj[q] * ss;
            }
        }
    }

    /// out_cos[j,q] = (1/M) sum_m values[m,q] cos(2 pi k_j t_m), likewise for sin.
    void project(const NodeValues& values, std::span<double> out_cos, std::span<double> out_sin) const {
        const std::size_t stride = values.stride();
        std::fill(out_cos.begin(), out_cos.end(), 0.0);
        std::fill(out_sin.begin(), out_sin.end(), 0.0);
        for (std::size_t m = 0; m < nodes_; ++m) {
            const double* row = values.data.data() + m * stride;
            for (std::size_t j = 0; j < harmonics_; ++j) {
                const double c = cos_at(m, j), s = sin_at(m, j);
                double* oc = out_cos.data() + j * stride;
                double* os = out_sin.data() + j * stride;
                for (std::size_t q = 0; q < stride; ++q) {
                    oc[q] += row[q] * c;
                    os[q] += row[q] * s;
                }
            }
        }
        const double w = 1.0 / static_cast<double>(nodes_);
        for (auto& v : out_cos) v *= w;
        for (auto& v : out_sin) v *= w;
    }

private:
    std::size_t harmonics_;
    std::size_t nodes_;
    std::vector<double> cos_;
    std::vector<double> sin_;
};

struct LoopSamples {
    NodeValues positions;
    NodeValues velocities;
};

/// Positions and exact spectral velocities at every grid node.
inline LoopSamples evaluate(const Loop& loop, const SampleGrid& grid) {
    require_resolved(loop, grid);
    const SpectralBasis basis(loop.harmonic_count(), grid);
    LoopSamples out;
    basis.synthesize(loop, 0, out.positions);
    basis.synthesize(loop, 1, out.velocities);
    return out;
}

/// Mass-weighted kinetic seminorm (int_0^1 sum_i m_i |u_i'|^2 dt)^{1/2}, exact via Parseval.
inline double h1_norm(const Loop& loop, std::span<const double> masses) {
    if (masses.size() != loop.n_bodies()) {
        throw InvalidArgument("h1_norm: mass count does not match body count");
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < loop.harmonic_count(); ++j) {
        const double w = two_pi * Loop::harmonic(j);
        for (std::size_t i = 0; i < loop.n_bodies(); ++i) {
            double amp = 0.0;
            for (std::size_t d = 0; d < loop.dimension(); ++d) {
                const double a = loop.cos_coeff(j, i, d), b = loop.sin_coeff(j, i, d);
                amp += a * a + b * b;
            }
            sum += masses[i] * w * w * amp / 2.0;
        }
    }
    return std::sqrt(sum);
}

/// Unweighted (int_0^1 |u|^2 dt)^{1/2}.
inline double l2_norm(const Loop& loop) {
    double sum = 0.0;
    for (std::size_t q = 0; q < loop.block_size(); ++q) {
        sum += loop.cos_coeffs()[q] * loop.cos_coeffs()[q] + loop.sin_coeffs()[q] * loop.sin_coeffs()[q];
    }
    return std::sqrt(sum / 2.0);
}

/// Smallest pairwise separation over grid nodes. Approximates p(u) from above: the
/// continuous-time minimum may fall between nodes.
inline double min_separation(const NodeValues& positions) {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t dim = positions.dimension;
    for (std::size_t m = 0; m < positions.nodes; ++m) {
        const auto row = positions.at(m);
        for (std::size_t i = 0; i < positions.n_bodies; ++i) {
            for (std::size_t k = i + 1; k < positions.n_bodies; ++k) {
                double r2 = 0.0;
                for (std::size_t d = 0; d < dim; ++d) {
                    const double diff = row[i * dim + d] - row[k * dim + d];
                    r2 += diff * diff;
                }
                best = std::min(best, r2);
            }
        }
    }
    return std::sqrt(best);
}

inline double min_separation(const Loop& loop, const SampleGrid& grid) {
    if (loop.n_bodies() < 2) throw InvalidArgument("min_separation: needs at least two bodies");
    require_resolved(loop, grid);
    NodeValues positions;
    SpectralBasis(loop.harmonic_count(), grid).synthesize(loop, 0, positions);
    return min_separation(positions);
}

/// Random start with coefficients i.i.d. uniform in [-amplitude/k^2, amplitude/k^2].
inline Loop random_loop(std::size_t n_bodies, std::size_t dimension, std::size_t harmonics, double amplitude,
                        std::uint64_t seed) {
    if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
        throw InvalidArgument("random_loop: amplitude must be positive and finite");
    }
    std::mt19937_64 rng(seed);
    const std::size_t stride = n_bodies * dimension;
    std::vector<double> a(harmonics * stride), b(harmonics * stride);
    for (std::size_t j = 0; j < harmonics; ++j) {
        const double k = Loop::harmonic(j);
        std::uniform_real_distribution<double> coeff(-amplitude / (k * k), amplitude / (k * k));
        for (std::size_t q = 0; q < stride; ++q) {
            a[j * stride + q] = coeff(rng);
            b[j * stride + q] = coeff(rng);
        }
    }
    return make_loop(n_bodies, dimension, harmonics, a, b);
}

/// Returns the loop t -> sign * u(t + shift).
inline Loop time_shift(const Loop& loop, double shift, double sign = 1.0) {
    const std::size_t stride = loop.n_bodies() * loop.dimension();
    std::vector<double> a(loop.block_size()), b(loop.block_size());
    for (std::size_t j = 0; j < loop.harmonic_count(); ++j) {
        const double phase = two_pi * Loop::harmonic(j) * shift;
        const double c = std::cos(phase), s = std::sin(phase);
        for (std::size_t q = 0; q < stride; ++q) {
            const double aq = loop.cos_coeffs()[j * stride + q], bq = loop.sin_coeffs()[j * stride + q];
            a[j * stride + q] = sign * (aq * c + bq * s);
            b[j * stride + q] = sign * (bq * c - aq * s);
        }
    }
    return make_loop(loop.n_bodies(), loop.dimension(), loop.harmonic_count(), a, b);
}

inline Loop scaled(const Loop& loop, double factor) {
    std::vector<double> a(loop.cos_coeffs().begin(), loop.cos_coeffs().end());
    std::vector<double> b(loop.sin_coeffs().begin(), loop.sin_coeffs().end());
    for (auto& v : a) v *= factor;
    for (auto& v : b) v *= factor;
    return make_loop(loop.n_bodies(), loop.dimension(), loop.harmonic_count(), a, b);
}

/// Same path with K' harmonics: zero-padded when growing, truncated when shrinking.
inline Loop with_harmonics(const Loop& loop, std::size_t harmonics) {
    const std::size_t stride = loop.n_bodies() * loop.dimension();
    std::vector<double> a(harmonics * stride, 0.0), b(harmonics * stride, 0.0);
    const std::size_t keep = std::min(harmonics, loop.harmonic_count()) * stride;
    std::copy_n(loop.cos_coeffs().begin(), keep, a.begin());
    std::copy_n(loop.sin_coeffs().begin(), keep, b.begin());
    return make_loop(loop.n_bodies(), loop.dimension(), harmonics, a, b);
}

/// Distance modulo discrete time shifts and global sign:
///   min_{s in grid, sigma = +-1} ||a - sigma b(. + s)||_{L2} / max(||a||_{L2}, ||b||_{L2}).
/// Rotations and body relabelings are not quotiented.
inline double loop_distance(const Loop& a, const Loop& b, const SampleGrid& grid) {
    if (a.n_bodies() != b.n_bodies() || a.dimension() != b.dimension()) {
        throw InvalidArgument("loop_distance: loops have different body count or dimension");
    }
    const double scale = std::max(l2_norm(a), l2_norm(b));
    if (scale == 0.0) return 0.0;
    const std::size_t stride = a.n_bodies() * a.dimension();
    const std::size_t harmonics = std::max(a.harmonic_count(), b.harmonic_count());
    auto coeff = [stride](const Loop& l, bool cos_block, std::size_t j, std::size_t q) {
        if (j >= l.harmonic_count()) return 0.0;
        return cos_block ? l.cos_coeffs()[j * stride + q] : l.sin_coeffs()[j * stride + q];
    };
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < grid.size(); ++m) {
        for (double sign : {1.0, -1.0}) {
            double sum = 0.0;
            for (std::size_t j = 0; j < harmonics; ++j) {
                const double phase = two_pi * static_cast<double>((Loop::harmonic(j) * m) % grid.size()) /
                                     static_cast<double>(grid.size());
                const double c = std::cos(phase), s = std::sin(phase);
                for (std::size_t q = 0; q < stride; ++q) {
                    const double ba = coeff(b, true, j, q), bb = coeff(b, false, j, q);
                    const double da = coeff(a, true, j, q) - sign * (ba * c + bb * s);
                    const double db = coeff(a, false, j, q) - sign * (bb * c - ba * s);
                    sum += da * da + db * db;
                }
            }
            best = std::min(best, sum);
        }
    }
    return std::sqrt(best / 2.0) / scale;
}

}  // namespace porbit
