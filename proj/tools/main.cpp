#include "cli.hpp"

#include <iostream>

#include <CLI11.hpp>

#include "runaway/errors.hpp"

namespace runaway::cli {

int main(int argc, char** argv) {
    CLI::App app{"Runaway-electron Landau-Coulomb kinetic solver"};
    app.require_subcommand(1);

    std::string config_path, series_path;
    std::vector<double> fields;
    int jobs = 1;

    auto* run = app.add_subcommand("run", "Run one simulation and write series.csv");
    run->add_option("config", config_path, "key=value config file")->required();

    auto* verify = app.add_subcommand("verify", "Fit a series and write the verdict file");
    verify->add_option("series", series_path, "series.csv to check")->required();
    verify->add_option("config", config_path, "config the series was produced with")->required();

    auto* sweep = app.add_subcommand("sweep", "Run one simulation per field strength");
    sweep->add_option("config", config_path, "template config")->required();
    sweep->add_option("--fields", fields, "field strengths, comma separated")->required()->delimiter(',');
    sweep->add_option("--jobs", jobs, "concurrent members")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    SimConfig config;
    try {
        config = parse_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << config_path << ": " << e.what() << '\n';
        return kExitConfigError;
    }

    if (*run) return cmd_run(config, std::cerr);
    if (*verify) return cmd_verify(series_path, config, std::cout, std::cerr);
    return cmd_sweep(config, fields, jobs, std::cout, std::cerr);
}

}  // namespace runaway::cli
