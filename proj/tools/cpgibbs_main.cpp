#include <iostream>

#include <omp.h>

#include "CLI11.hpp"
#include "cpgibbs/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Gibbs measures on adic carpets: CP-chain diagnostics and projection dimension checks"};
    app.require_subcommand(1, 1);
    std::string config_path, out_dir;
    int threads = 0;
    for (const auto& name : cpgibbs::commands::command_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (default: output_dir from the config)");
        sub->add_option("--threads", threads, "OpenMP worker count")->check(CLI::PositiveNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cpgibbs::commands::kConfigError;
    }
    if (threads > 0) omp_set_num_threads(threads);
    const std::string command = app.get_subcommands().front()->get_name();
    return cpgibbs::commands::run_cli(command, config_path, out_dir, std::cout, std::cerr);
}
