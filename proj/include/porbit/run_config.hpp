#pragma once

// INI-style run configuration:
//
//   [system]    bodies, dimension, masses, energy
//   [potential] alpha, theta, r1, r2
//   [solver]    harmonics, grid, starts, seed, max_iterations, gradient_tolerance, memory,
//               amplitude, dedup_action_gap, dedup_distance
//   [output]    directory, samples, verify_tolerance
//
// Unknown sections or keys are errors. grid = 0 picks the smallest power of two that
// resolves the harmonics.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "porbit/error.hpp"
#include "porbit/loop_space.hpp"
#include "porbit/potentials.hpp"
#include "porbit/solver.hpp"
#include "porbit/system.hpp"

namespace porbit {

class ConfigError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    std::size_t bodies = 2;
    std::size_t dimension = 2;
    std::vector<double> masses;  // empty: all ones
    double energy = 0.5;

    double alpha = 3.0;
    double theta = -1.0;
    double r1 = 0.5;
    double r2 = 1.5;

    std::size_t harmonics = 16;
    std::size_t grid = 0;
    SolverSettings solver;

    std::string output_directory = "porbit_out";
    std::size_t samples = 256;
    double verify_tolerance = 1e-4;

    std::vector<double> mass_vector() const {
        return masses.empty() ? std::vector<double>(bodies, 1.0) : masses;
    }
    PotentialFamily family() const { return build_family(alpha, theta, r1, r2); }
    SystemConfig system() const { return SystemConfig(bodies, dimension, mass_vector(), energy, family()); }
    SampleGrid sample_grid() const { return grid == 0 ? SampleGrid::for_harmonics(harmonics) : SampleGrid(grid); }

    /// Checks every range; library errors are rethrown as ConfigError.
    void validate() const {
        try {
            if (bodies < 2) throw ConfigError("config: [system] bodies must be at least 2");
            if (dimension == 0) throw ConfigError("config: [system] dimension must be positive");
            if (!masses.empty() && masses.size() != bodies) {
                throw ConfigError("config: [system] masses lists " + std::to_string(masses.size()) +
                                  " values for " + std::to_string(bodies) + " bodies");
            }
            if (harmonics == 0) throw ConfigError("config: [solver] harmonics must be positive");
            if (samples < 2 || samples % 2 != 0) throw ConfigError("config: [output] samples must be even and >= 2");
            if (!(verify_tolerance > 0.0)) throw ConfigError("config: [output] verify_tolerance must be positive");
            (void)system();
            const SampleGrid g = sample_grid();
            if (!g.resolves(Loop::harmonic(harmonics - 1))) {
                throw ConfigError("config: grid of " + std::to_string(g.size()) + " nodes cannot resolve " +
                                  std::to_string(harmonics) + " harmonics (need >= " +
                                  std::to_string(4 * Loop::harmonic(harmonics - 1)) + ")");
            }
            solver.validate();
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    }
};

namespace detail {

inline double parse_double(const std::string& text, const std::string& where) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw ConfigError("config: " + where + " expects a finite number, got '" + text + "'");
    }
    return v;
}

inline std::uint64_t parse_unsigned(const std::string& text, const std::string& where) {
    std::uint64_t v = 0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw ConfigError("config: " + where + " expects a non-negative integer, got '" + text + "'");
    }
    return v;
}

inline std::vector<double> parse_list(const std::string& text, const std::string& where) {
    std::string spaced = text;
    for (char& c : spaced) {
        if (c == ',') c = ' ';
    }
    std::istringstream in(spaced);
    std::vector<double> out;
    for (std::string tok; in >> tok;) out.push_back(parse_double(tok, where));
    return out;
}

}  // namespace detail

inline RunConfig parse_run_config(std::istream& in, const std::string& source = "<config>") {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("config: " + source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }

    static const std::map<std::string, std::set<std::string>> known = {
        {"system", {"bodies", "dimension", "masses", "energy"}},
        {"potential", {"alpha", "theta", "r1", "r2"}},
        {"solver",
         {"harmonics", "grid", "starts", "seed", "max_iterations", "gradient_tolerance", "memory", "amplitude",
          "dedup_action_gap", "dedup_distance"}},
        {"output", {"directory", "samples", "verify_tolerance"}},
    };

    RunConfig cfg;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ConfigError("config: " + source + ": key '" + section + "' outside any section");
        }
        const auto sec = known.find(section);
        if (sec == known.end()) throw ConfigError("config: " + source + ": unknown section [" + section + "]");
        for (const auto& [key, node] : body) {
            if (!sec->second.contains(key)) {
                throw ConfigError("config: " + source + ": unknown key '" + key + "' in [" + section + "]");
            }
            const std::string value = node.get_value<std::string>();
            const std::string where = "[" + section + "] " + key;
            auto real = [&] { return detail::parse_double(value, where); };
            auto count = [&] { return static_cast<std::size_t>(detail::parse_unsigned(value, where)); };

            if (section == "system") {
                if (key == "bodies") cfg.bodies = count();
                else if (key == "dimension") cfg.dimension = count();
                else if (key == "masses") cfg.masses = detail::parse_list(value, where);
                else cfg.energy = real();
            } else if (section == "potential") {
                if (key == "alpha") cfg.alpha = real();
                else if (key == "theta") cfg.theta = real();
                else if (key == "r1") cfg.r1 = real();
                else cfg.r2 = real();
            } else if (section == "solver") {
                if (key == "harmonics") cfg.harmonics = count();
                else if (key == "grid") cfg.grid = count();
                else if (key == "starts") cfg.solver.starts = count();
                else if (key == "seed") cfg.solver.seed = detail::parse_unsigned(value, where);
                else if (key == "max_iterations") cfg.solver.max_iterations = count();
                else if (key == "gradient_tolerance") cfg.solver.gradient_tolerance = real();
                else if (key == "memory") cfg.solver.memory = count();
                else if (key == "amplitude") cfg.solver.amplitude = real();
                else if (key == "dedup_action_gap") cfg.solver.dedup_action_gap = real();
                else cfg.solver.dedup_distance = real();
            } else {
                if (key == "directory") cfg.output_directory = value;
                else if (key == "samples") cfg.samples = count();
                else cfg.verify_tolerance = real();
            }
        }
    }
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    return parse_run_config(in, path);
}

}  // namespace porbit
