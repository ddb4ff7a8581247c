#pragma once

// Command implementations behind the porbit executable. Each returns the process exit code:
//   0  success
//   1  configuration, argument or parse error (nothing computed)
//   2  computed, but no solution converged / a threshold or certification check failed

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "porbit/orbit_io.hpp"
#include "porbit/potentials.hpp"
#include "porbit/reconstruct.hpp"
#include "porbit/run_config.hpp"
#include "porbit/solver.hpp"

namespace porbit::cli {

enum ExitCode : int { ok = 0, config_error = 1, check_failed = 2 };

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> starts;
    std::optional<std::size_t> harmonics;
    std::optional<std::size_t> grid;
    std::optional<std::string> out;
    std::optional<double> tol;
};

/// Worker count from PORBIT_WORKERS; unset means 1.
inline std::size_t workers_from_env() {
    const char* raw = std::getenv("PORBIT_WORKERS");
    if (raw == nullptr || *raw == '\0') return 1;
    std::size_t n = 0;
    const std::string_view text(raw);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
    if (ec != std::errc() || ptr != text.data() + text.size() || n == 0) {
        throw ConfigError("PORBIT_WORKERS must be a positive integer, got '" + std::string(text) + "'");
    }
    return n;
}

inline RunConfig load_with_overrides(const std::string& path, const Overrides& o) {
    RunConfig cfg = load_run_config(path);
    if (o.seed) cfg.solver.seed = *o.seed;
    if (o.starts) cfg.solver.starts = *o.starts;
    if (o.harmonics) cfg.harmonics = *o.harmonics;
    if (o.grid) cfg.grid = *o.grid;
    if (o.out) cfg.output_directory = *o.out;
    if (o.tol) cfg.verify_tolerance = *o.tol;
    cfg.solver.workers = workers_from_env();
    cfg.validate();
    return cfg;
}

namespace detail {

inline nlohmann::ordered_json config_json(const RunConfig& cfg, const SampleGrid& grid) {
    nlohmann::ordered_json j;
    j["system"] = {{"bodies", cfg.bodies},
                   {"dimension", cfg.dimension},
                   {"masses", cfg.mass_vector()},
                   {"energy", cfg.energy}};
    j["potential"] = {{"alpha", cfg.alpha}, {"theta", cfg.theta}, {"r1", cfg.r1}, {"r2", cfg.r2}};
    j["solver"] = {{"harmonics", cfg.harmonics},
                   {"grid", grid.size()},
                   {"starts", cfg.solver.starts},
                   {"seed", cfg.solver.seed},
                   {"max_iterations", cfg.solver.max_iterations},
                   {"gradient_tolerance", cfg.solver.gradient_tolerance},
                   {"memory", cfg.solver.memory},
                   {"amplitude", cfg.solver.amplitude},
                   {"dedup_action_gap", cfg.solver.dedup_action_gap},
                   {"dedup_distance", cfg.solver.dedup_distance}};
    j["output"] = {{"samples", cfg.samples}, {"verify_tolerance", cfg.verify_tolerance}};
    return j;
}

inline std::string orbit_name(std::size_t index) {
    std::ostringstream name;
    name << "orbit_" << std::setw(3) << std::setfill('0') << index << ".txt";
    return name.str();
}

struct Solved {
    CriticalPoint cp;
    OrbitSolution orbit;
};

inline std::vector<Solved> solve(const RunConfig& cfg) {
    const SystemConfig system = cfg.system();
    const SampleGrid grid = cfg.sample_grid();
    std::vector<Solved> out;
    for (auto& cp : multistart(system, cfg.harmonics, grid, cfg.solver)) {
        if (!(cp.f_value > 0.0)) continue;
        const double T = period(cp, system, grid);
        OrbitSolution orbit = to_orbit(cp, system, T, cfg.samples, grid);
        out.push_back({std::move(cp), std::move(orbit)});
    }
    return out;
}

}  // namespace detail

inline int cmd_solve(const std::string& config_path, const Overrides& overrides, std::ostream& out,
                     std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = load_with_overrides(config_path, overrides);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return config_error;
    }
    const SystemConfig system = cfg.system();
    const SampleGrid grid = cfg.sample_grid();
    const auto solved = detail::solve(cfg);

    nlohmann::ordered_json summary;
    summary["tool"] = "porbit";
    summary["version"] = std::string(version);
    summary["config"] = detail::config_json(cfg, grid);
    summary["converged"] = solved.size();
    summary["solutions"] = nlohmann::ordered_json::array();
    for (std::size_t s = 0; s < solved.size(); ++s) {
        const auto& [cp, orbit] = solved[s];
        nlohmann::ordered_json rec;
        rec["index"] = s;
        rec["file"] = detail::orbit_name(s);
        rec["action"] = cp.f_value;
        rec["period"] = orbit.period;
        rec["min_separation"] = cp.p_value;
        rec["norm"] = cp.ls.norm;
        rec["gradient_norm"] = cp.gradient_norm;
        rec["iterations"] = cp.iterations;
        rec["seed"] = cp.seed;
        rec["start_index"] = cp.start_index;
        rec["residuals"] = {{"ode", orbit.residuals.ode},
                            {"energy", orbit.residuals.energy},
                            {"periodicity", orbit.residuals.periodicity}};
        rec["ls"] = {{"gamma", cp.ls.gamma},       {"beta", cp.ls.beta},
                     {"g_value", cp.ls.g_value},   {"lambda0", cp.ls.lambda0},
                     {"k1", cp.ls.k1},             {"k_inf_est", cp.ls.k_inf_est},
                     {"bound_rhs", cp.ls.growth_bound_rhs}, {"gradient_dominance_margin", cp.ls.dominance_margin}};
        summary["solutions"].push_back(std::move(rec));
    }

    // All files are written together once the computation is finished.
    const std::filesystem::path dir(cfg.output_directory);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        err << "error: cannot create output directory '" << dir.string() << "': " << ec.message() << '\n';
        return config_error;
    }
    for (std::size_t s = 0; s < solved.size(); ++s) {
        std::ofstream f(dir / detail::orbit_name(s));
        write_orbit(f, make_record(solved[s].orbit, solved[s].cp, system, grid, cfg.verify_tolerance));
    }
    std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';

    out << "solutions: " << solved.size() << " (of " << cfg.solver.starts << " starts)\n";
    for (std::size_t s = 0; s < solved.size(); ++s) {
        const auto& [cp, orbit] = solved[s];
        out << "  " << detail::orbit_name(s) << "  f = " << format_double(cp.f_value)
            << "  T = " << format_double(orbit.period) << "  p = " << format_double(cp.p_value)
            << "  ode = " << format_double(orbit.residuals.ode) << "  energy = " << format_double(orbit.residuals.energy)
            << '\n';
    }
    out << "summary: " << (dir / "summary.json").string() << '\n';
    if (solved.empty()) {
        err << "error: no start converged\n";
        return check_failed;
    }
    return ok;
}

inline int cmd_verify(const std::string& orbit_path, std::optional<double> tol, std::ostream& out,
                      std::ostream& err) {
    OrbitRecord record;
    std::optional<SystemConfig> system;
    try {
        record = read_orbit_file(orbit_path);
        system.emplace(record.system());
        if (tol && !(*tol > 0.0)) throw ConfigError("--tol must be positive");
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return config_error;
    }
    const double threshold = tol.value_or(record.verify_tolerance);
    ResidualReport report;
    try {
        const SampleGrid grid = verification_grid(SampleGrid(record.solver_grid));
        report = verify_orbit(to_solution(record), *system, grid);
    } catch (const CollisionError& e) {
        err << "fail: " << e.what() << '\n';
        return check_failed;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return config_error;
    }
    const bool pass = report.ode <= threshold && report.energy <= threshold;
    out << "orbit: " << orbit_path << '\n'
        << "  period       " << format_double(record.period) << '\n'
        << "  nodes        " << report.nodes << '\n'
        << "  ode          " << format_double(report.ode) << '\n'
        << "  energy       " << format_double(report.energy) << '\n'
        << "  periodicity  " << format_double(report.periodicity) << '\n'
        << "  threshold    " << format_double(threshold) << '\n'
        << (pass ? "PASS" : "FAIL") << '\n';
    return pass ? ok : check_failed;
}

/// `corrupt_blend` flips the sign of the outer blend weight (test hook for the negative control).
inline int cmd_certify(const std::string& config_path, bool corrupt_blend, std::ostream& out, std::ostream& err) {
    PotentialFamily fam;
    try {
        const RunConfig cfg = load_run_config(config_path);
        fam = cfg.family();
    } catch (const BlendNegativityError& e) {
        err << "fail: " << e.what() << " (witness s = " << format_double(e.witness()) << ")\n";
        return check_failed;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return config_error;
    }
    if (corrupt_blend) fam = fam.with_blend_weights({fam.blend_weights()[0], -fam.blend_weights()[1]});

    const ConditionReport report = certify(fam);
    auto line = [&](const char* name, const ConditionCheck& c) {
        out << "  " << std::left << std::setw(16) << name << (c.pass ? "pass" : "FAIL");
        if (c.structural) {
            out << "  (structural: radial pair law)";
        } else {
            out << "  worst margin " << format_double(c.worst_margin) << " at s = " << format_double(c.witness);
        }
        out << '\n';
    };
    out << "potential alpha = " << format_double(fam.alpha()) << ", theta = " << format_double(fam.theta())
        << ", r1 = " << format_double(fam.r1()) << ", r2 = " << format_double(fam.r2()) << '\n';
    line("nonpositive", report.nonpositive);
    line("inner_growth", report.inner_growth);
    line("outer_bound", report.outer_bound);
    line("pair_symmetry", report.pair_symmetry);
    line("continuity", report.continuity);
    for (const ConditionCheck* c : {&report.nonpositive, &report.inner_growth, &report.outer_bound, &report.continuity}) {
        if (!c->pass) {
            out << "witness s = " << format_double(c->witness) << '\n';
            break;
        }
    }
    out << (report.all_pass() ? "PASS" : "FAIL") << '\n';
    return report.all_pass() ? ok : check_failed;
}

/// One multistart per value; the lowest-action converged solution is tabulated. Rows that
/// fail (bad value, nothing converged) are recorded with a status instead of aborting.
inline int cmd_sweep(const std::string& config_path, const std::string& parameter,
                     const std::vector<std::string>& values, const Overrides& overrides, std::ostream& out,
                     std::ostream& err) {
    RunConfig base;
    std::vector<double> parsed;
    try {
        if (parameter != "h" && parameter != "alpha" && parameter != "theta" && parameter != "K") {
            throw ConfigError("sweep parameter must be one of h, alpha, theta, K; got '" + parameter + "'");
        }
        if (values.empty()) throw ConfigError("sweep needs at least one value");
        for (const auto& v : values) parsed.push_back(porbit::detail::parse_double(v, "sweep value"));
        base = load_with_overrides(config_path, overrides);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return config_error;
    }

    std::ostringstream table;
    table << "value,f,T,p,ode_residual,energy_residual,periodicity_residual,converged,status\n";
    for (double value : parsed) {
        RunConfig cfg = base;
        std::string status = "ok";
        std::optional<detail::Solved> best;
        try {
            if (parameter == "h") cfg.energy = value;
            else if (parameter == "alpha") cfg.alpha = value;
            else if (parameter == "theta") cfg.theta = value;
            else {
                if (!(value >= 1.0) || value != std::floor(value)) throw ConfigError("K must be a positive integer");
                cfg.harmonics = static_cast<std::size_t>(value);
                const SampleGrid needed = SampleGrid::for_harmonics(cfg.harmonics);
                if (cfg.grid != 0 && cfg.grid < needed.size()) cfg.grid = needed.size();
            }
            cfg.validate();
            auto solved = detail::solve(cfg);
            if (solved.empty()) status = "no_convergence";
            else best = std::move(solved.front());
        } catch (const Error& e) {
            status = std::string("error: ") + e.what();
            for (char& c : status) {
                if (c == ',' || c == '\n') c = ';';
            }
        }
        table << format_double(value) << ',';
        if (best) {
            table << format_double(best->cp.f_value) << ',' << format_double(best->orbit.period) << ','
                  << format_double(best->cp.p_value) << ',' << format_double(best->orbit.residuals.ode) << ','
                  << format_double(best->orbit.residuals.energy) << ','
                  << format_double(best->orbit.residuals.periodicity) << ",1,";
        } else {
            table << "nan,nan,nan,nan,nan,nan,0,";
        }
        table << status << '\n';
    }

    const std::filesystem::path dir(base.output_directory);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        err << "error: cannot create output directory '" << dir.string() << "': " << ec.message() << '\n';
        return config_error;
    }
    const auto path = dir / ("sweep_" + parameter + ".csv");
    std::ofstream(path) << table.str();
    out << table.str() << "table: " << path.string() << '\n';
    return ok;
}

}  // namespace porbit::cli
