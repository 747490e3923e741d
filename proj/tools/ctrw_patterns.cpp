// ctrw-patterns: experiment driver for reaction-diffusion on networks.
//
// Subcommands:
//   run <config>        execute one experiment described by a config file
//   figures             run the canned figure batch and write data tables
//   validate <config>   parse and validate a config without running it
//
// Exit codes: 0 success, 1 computation failure, 2 config error.

#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "ctrw/experiment.hpp"
#include "ctrw/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"CTRW reaction-diffusion patterns on networks"};
    app.set_version_flag("--version", std::string("ctrw-patterns ") + ctrw::version_string);
    app.require_subcommand(1);

    std::string run_config;
    CLI::App* cmd_run = app.add_subcommand("run", "execute one experiment from a config file");
    cmd_run->add_option("config", run_config, "config file path")->required();

    int fig_size = 50;
    std::string fig_out = "figures_out";
    unsigned fig_threads = 0;
    CLI::App* cmd_figures = app.add_subcommand("figures", "run the canned figure batch");
    cmd_figures->add_option("--size", fig_size, "network size (50 or 500)")
        ->check(CLI::IsMember({50, 500}));
    cmd_figures->add_option("--out", fig_out, "output directory");
    cmd_figures->add_option("--threads", fig_threads, "worker threads (0 = hardware)");

    std::string validate_config;
    CLI::App* cmd_validate = app.add_subcommand("validate", "validate a config file");
    cmd_validate->add_option("config", validate_config, "config file path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_run->parsed()) {
            const ctrw::RunResult result = ctrw::run_config_file(run_config);
            std::cout << "kind: " << ctrw::to_string(result.kind) << "\n";
            if (!result.termination.empty()) std::cout << "termination: " << result.termination << "\n";
            if (!result.classification.empty())
                std::cout << "classification: " << result.classification << "\n";
            for (const auto& a : result.artifacts) std::cout << "wrote " << a << "\n";
            return 0;
        }
        if (cmd_figures->parsed()) {
            const ctrw::FigureBatchResult result =
                ctrw::reproduce_figures(fig_size, fig_out, fig_threads);
            for (const auto& t : result.tables) std::cout << "wrote " << t << "\n";
            return 0;
        }
        if (cmd_validate->parsed()) {
            ctrw::ExperimentConfig::from_file(validate_config);
            std::cout << "OK: " << validate_config << "\n";
            return 0;
        }
    } catch (const ctrw::ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const ctrw::ParseError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 2;
}
