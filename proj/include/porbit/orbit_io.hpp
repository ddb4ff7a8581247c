#pragma once

// Orbit files: a plain-text document with three blocks.
//
//   porbit-orbit 1
//   key = value            header: system, potential, solver grid, T, f, residuals, seed
//   ...
//   [coefficients]
//   k body dim cos sin     one row per odd harmonic k, body and coordinate
//   [samples]
//   count = S
//   t q.. v..              S rows; positions then velocities, body-major
//   [end]
//
// Numbers are written in shortest round-trip form, so reading a file back reproduces
// the loop bit for bit. Anything missing, including the [end] marker, is a parse error.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "porbit/error.hpp"
#include "porbit/loop_space.hpp"
#include "porbit/potentials.hpp"
#include "porbit/reconstruct.hpp"
#include "porbit/system.hpp"

namespace porbit {

inline constexpr std::string_view version = "0.1.0";

class ParseError : public Error {
public:
    using Error::Error;
};

struct OrbitRecord {
    std::size_t bodies = 0;
    std::size_t dimension = 0;
    std::vector<double> masses;
    double energy = 0.0;
    double alpha = 0.0, theta = 0.0, r1 = 0.0, r2 = 0.0;
    std::size_t solver_grid = 0;
    double period = 0.0;
    double f_value = 0.0;
    double min_separation = 0.0;
    double gradient_norm = 0.0;
    std::uint64_t seed = 0;
    std::size_t start_index = 0;
    double verify_tolerance = 1e-4;
    ResidualReport residuals;
    Loop loop;
    std::vector<double> times;
    std::vector<double> positions;   // times.size() x bodies x dimension
    std::vector<double> velocities;  // same layout

    SystemConfig system() const {
        return SystemConfig(bodies, dimension, masses, energy, build_family(alpha, theta, r1, r2));
    }
};

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline OrbitRecord make_record(const OrbitSolution& orbit, const CriticalPoint& cp, const SystemConfig& config,
                               const SampleGrid& solver_grid, double verify_tolerance) {
    OrbitRecord r;
    r.bodies = config.n_bodies();
    r.dimension = config.dimension();
    r.masses.assign(config.masses().begin(), config.masses().end());
    r.energy = config.energy();
    r.alpha = config.potential().alpha();
    r.theta = config.potential().theta();
    r.r1 = config.potential().r1();
    r.r2 = config.potential().r2();
    r.solver_grid = solver_grid.size();
    r.period = orbit.period;
    r.f_value = cp.f_value;
    r.min_separation = cp.p_value;
    r.gradient_norm = cp.gradient_norm;
    r.seed = cp.seed;
    r.start_index = cp.start_index;
    r.verify_tolerance = verify_tolerance;
    r.residuals = orbit.residuals;
    r.loop = orbit.loop;
    r.times = orbit.times;
    r.positions = orbit.positions.data;
    r.velocities = orbit.velocities.data;
    return r;
}

inline void write_orbit(std::ostream& out, const OrbitRecord& r) {
    auto kv = [&](std::string_view key, const std::string& value) { out << key << " = " << value << '\n'; };
    out << "porbit-orbit 1\n";
    kv("tool_version", std::string(version));
    kv("bodies", std::to_string(r.bodies));
    kv("dimension", std::to_string(r.dimension));
    std::string masses;
    for (std::size_t i = 0; i < r.masses.size(); ++i) masses += (i ? " " : "") + format_double(r.masses[i]);
    kv("masses", masses);
    kv("energy", format_double(r.energy));
    kv("alpha", format_double(r.alpha));
    kv("theta", format_double(r.theta));
    kv("r1", format_double(r.r1));
    kv("r2", format_double(r.r2));
    kv("harmonics", std::to_string(r.loop.harmonic_count()));
    kv("solver_grid", std::to_string(r.solver_grid));
    kv("period", format_double(r.period));
    kv("action", format_double(r.f_value));
    kv("min_separation", format_double(r.min_separation));
    kv("gradient_norm", format_double(r.gradient_norm));
    kv("seed", std::to_string(r.seed));
    kv("start_index", std::to_string(r.start_index));
    kv("verify_tolerance", format_double(r.verify_tolerance));
    kv("residual_ode", format_double(r.residuals.ode));
    kv("residual_energy", format_double(r.residuals.energy));
    kv("residual_periodicity", format_double(r.residuals.periodicity));

    out << "[coefficients]\n";
    const Loop& loop = r.loop;
    for (std::size_t j = 0; j < loop.harmonic_count(); ++j) {
        for (std::size_t i = 0; i < loop.n_bodies(); ++i) {
            for (std::size_t d = 0; d < loop.dimension(); ++d) {
                out << Loop::harmonic(j) << ' ' << i << ' ' << d << ' ' << format_double(loop.cos_coeff(j, i, d)) << ' '
                    << format_double(loop.sin_coeff(j, i, d)) << '\n';
            }
        }
    }

    out << "[samples]\n";
    out << "count = " << r.times.size() << '\n';
    const std::size_t stride = r.bodies * r.dimension;
    for (std::size_t s = 0; s < r.times.size(); ++s) {
        out << format_double(r.times[s]);
        for (std::size_t q = 0; q < stride; ++q) out << ' ' << format_double(r.positions[s * stride + q]);
        for (std::size_t q = 0; q < stride; ++q) out << ' ' << format_double(r.velocities[s * stride + q]);
        out << '\n';
    }
    out << "[end]\n";
}

namespace detail {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    std::string next(const char* expecting) {
        std::string line;
        if (!std::getline(in_, line)) throw ParseError(std::string("orbit file: unexpected end of file, expected ") + expecting);
        ++line_no_;
        return line;
    }
    std::size_t line() const noexcept { return line_no_; }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

template <class T>
T parse_number(std::string_view text, std::size_t line) {
    T v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ParseError("orbit file: line " + std::to_string(line) + ": bad number '" + std::string(text) + "'");
    }
    return v;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && line[pos] == ' ') ++pos;
        const std::size_t start = pos;
        while (pos < line.size() && line[pos] != ' ') ++pos;
        if (pos > start) out.push_back(line.substr(start, pos - start));
    }
    return out;
}

}  // namespace detail

inline OrbitRecord read_orbit(std::istream& in) {
    detail::LineReader reader(in);
    if (reader.next("header") != "porbit-orbit 1") throw ParseError("orbit file: missing 'porbit-orbit 1' header");

    std::map<std::string, std::string> header;
    for (std::string line = reader.next("[coefficients]"); line != "[coefficients]"; line = reader.next("[coefficients]")) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) {
            throw ParseError("orbit file: line " + std::to_string(reader.line()) + ": expected 'key = value'");
        }
        header[line.substr(0, eq)] = line.substr(eq + 3);
    }
    auto field = [&](const std::string& key) -> const std::string& {
        const auto it = header.find(key);
        if (it == header.end()) throw ParseError("orbit file: header lacks '" + key + "'");
        return it->second;
    };
    auto real = [&](const std::string& key) { return detail::parse_number<double>(field(key), 0); };
    auto count = [&](const std::string& key) { return detail::parse_number<std::size_t>(field(key), 0); };

    OrbitRecord r;
    r.bodies = count("bodies");
    r.dimension = count("dimension");
    for (auto tok : detail::split(field("masses"))) r.masses.push_back(detail::parse_number<double>(tok, 0));
    if (r.masses.size() != r.bodies) throw ParseError("orbit file: masses do not match bodies");
    r.energy = real("energy");
    r.alpha = real("alpha");
    r.theta = real("theta");
    r.r1 = real("r1");
    r.r2 = real("r2");
    const std::size_t harmonics = count("harmonics");
    r.solver_grid = count("solver_grid");
    r.period = real("period");
    r.f_value = real("action");
    r.min_separation = real("min_separation");
    r.gradient_norm = real("gradient_norm");
    r.seed = detail::parse_number<std::uint64_t>(field("seed"), 0);
    r.start_index = count("start_index");
    r.verify_tolerance = real("verify_tolerance");
    r.residuals.ode = real("residual_ode");
    r.residuals.energy = real("residual_energy");
    r.residuals.periodicity = real("residual_periodicity");
    if (r.bodies == 0 || r.dimension == 0 || harmonics == 0) throw ParseError("orbit file: empty shape");

    const std::size_t block = harmonics * r.bodies * r.dimension;
    std::vector<double> a(block), b(block);
    for (std::size_t j = 0; j < harmonics; ++j) {
        for (std::size_t i = 0; i < r.bodies; ++i) {
            for (std::size_t d = 0; d < r.dimension; ++d) {
                const std::string line = reader.next("coefficient row");
                const auto tok = detail::split(line);
                if (tok.size() != 5) {
                    throw ParseError("orbit file: line " + std::to_string(reader.line()) + ": expected 5 fields");
                }
                const auto k = detail::parse_number<int>(tok[0], reader.line());
                const auto bi = detail::parse_number<std::size_t>(tok[1], reader.line());
                const auto di = detail::parse_number<std::size_t>(tok[2], reader.line());
                if (k != Loop::harmonic(j) || bi != i || di != d) {
                    throw ParseError("orbit file: line " + std::to_string(reader.line()) + ": coefficient out of order");
                }
                const std::size_t q = (j * r.bodies + i) * r.dimension + d;
                a[q] = detail::parse_number<double>(tok[3], reader.line());
                b[q] = detail::parse_number<double>(tok[4], reader.line());
            }
        }
    }
    try {
        r.loop = make_loop(r.bodies, r.dimension, harmonics, a, b);
    } catch (const Error& e) {
        throw ParseError(std::string("orbit file: ") + e.what());
    }

    if (reader.next("[samples]") != "[samples]") throw ParseError("orbit file: expected [samples]");
    const std::string count_line = reader.next("sample count");
    if (count_line.rfind("count = ", 0) != 0) throw ParseError("orbit file: expected 'count = S'");
    const auto samples = detail::parse_number<std::size_t>(std::string_view(count_line).substr(8), reader.line());
    const std::size_t stride = r.bodies * r.dimension;
    r.times.reserve(samples);
    for (std::size_t s = 0; s < samples; ++s) {
        const std::string line = reader.next("sample row");
        const auto tok = detail::split(line);
        if (tok.size() != 1 + 2 * stride) {
            throw ParseError("orbit file: line " + std::to_string(reader.line()) + ": wrong sample width");
        }
        r.times.push_back(detail::parse_number<double>(tok[0], reader.line()));
        for (std::size_t q = 0; q < stride; ++q) r.positions.push_back(detail::parse_number<double>(tok[1 + q], reader.line()));
        for (std::size_t q = 0; q < stride; ++q) {
            r.velocities.push_back(detail::parse_number<double>(tok[1 + stride + q], reader.line()));
        }
    }
    if (reader.next("[end]") != "[end]") throw ParseError("orbit file: expected [end]");
    return r;
}

inline OrbitRecord read_orbit_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("orbit file: cannot open '" + path + "'");
    return read_orbit(in);
}

/// Rebuilds the OrbitSolution stored in a record (loop and period; samples are not needed
/// for verification).
inline OrbitSolution to_solution(const OrbitRecord& r) {
    OrbitSolution orbit;
    orbit.period = r.period;
    orbit.energy = r.energy;
    orbit.loop = r.loop;
    orbit.times = r.times;
    orbit.residuals = r.residuals;
    return orbit;
}

}  // namespace porbit
