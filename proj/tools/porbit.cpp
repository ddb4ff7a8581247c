// porbit: find, verify and tabulate symmetric periodic orbits of strong-force N-body systems.
//
//   porbit solve   --config FILE [--seed N] [--starts N] [--harmonics K] [--grid M] [--out DIR] [--tol X]
//   porbit verify  ORBIT_FILE [--tol X]
//   porbit certify --config FILE
//   porbit sweep   --config FILE --param {h,alpha,theta,K} --values v1,v2,... [solve overrides]
//
// PORBIT_WORKERS selects the number of parallel multistart workers.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "porbit/cli.hpp"

namespace {

void add_overrides(CLI::App* cmd, porbit::cli::Overrides& o) {
    cmd->add_option("--seed", o.seed, "Base seed for multistart");
    cmd->add_option("--starts", o.starts, "Number of multistart runs")->check(CLI::PositiveNumber);
    cmd->add_option("--harmonics", o.harmonics, "Odd harmonics kept (K)")->check(CLI::PositiveNumber);
    cmd->add_option("--grid", o.grid, "Quadrature nodes (M)")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--tol", o.tol, "Residual threshold written into orbit files");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Symmetric periodic orbits of strong-force N-body systems"};
    app.require_subcommand(1);

    std::string config;
    porbit::cli::Overrides overrides;

    auto* solve = app.add_subcommand("solve", "Multistart search; writes orbit files and summary.json");
    solve->add_option("--config", config, "Run configuration")->required();
    add_overrides(solve, overrides);

    std::string orbit_file;
    std::optional<double> verify_tol;
    auto* verify = app.add_subcommand("verify", "Check an orbit file against the equations of motion");
    verify->add_option("orbit", orbit_file, "Orbit file written by solve")->required();
    verify->add_option("--tol", verify_tol, "Residual threshold (default: the one stored in the file)");

    bool corrupt_blend = false;
    auto* cert = app.add_subcommand("certify", "Check the pair potential hypotheses on a dense grid");
    cert->add_option("--config", config, "Run configuration")->required();
    cert->add_flag("--corrupt-blend", corrupt_blend)->group("");  // negative-control hook

    std::string parameter;
    std::vector<std::string> values;
    auto* sweep = app.add_subcommand("sweep", "One solve per parameter value; writes a CSV table");
    sweep->add_option("--config", config, "Run configuration")->required();
    sweep->add_option("--param", parameter, "h, alpha, theta or K")->required();
    sweep->add_option("--values", values, "Comma-separated values")->delimiter(',')->expected(0, -1);
    add_overrides(sweep, overrides);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : porbit::cli::config_error;
    }

    if (*solve) return porbit::cli::cmd_solve(config, overrides, std::cout, std::cerr);
    if (*verify) return porbit::cli::cmd_verify(orbit_file, verify_tol, std::cout, std::cerr);
    if (*cert) return porbit::cli::cmd_certify(config, corrupt_blend, std::cout, std::cerr);
    return porbit::cli::cmd_sweep(config, parameter, values, overrides, std::cout, std::cerr);
}
